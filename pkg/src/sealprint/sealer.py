"""Heat-seal toolpath planning and G-code generation.

A seal job traces 2D curves with a hot, non-extruding nozzle pressed onto
the layered sheets at a fixed height.  Planning validates the geometry
against the printable region, orders the curves to cut travel, and samples
them densely so the weld line follows every bend.  Compilation turns the
plan into G-code: heat, then for each curve descend, traverse at sealing
speed, lift, and travel to the next one.  The output never extrudes.
"""

from __future__ import annotations

from dataclasses import dataclass

from sealprint.gcode import (
    BedTemp,
    Comment,
    GcodeProgram,
    Home,
    ModeSwitch,
    Move,
    NozzleTemp,
    PhaseSpan,
)
from sealprint.geometry import (
    PlanarPath,
    Point2,
    PrintRegion,
    RegionReport,
    check_within_region,
    order_paths,
    sample_path,
    self_intersects,
)
from sealprint.materials import MaterialStack, SealingSettings

__all__ = ["SealCurve", "SealPlan", "SealPlanError", "plan_seal", "compile_seal"]


class SealPlanError(ValueError):
    """Raised when a seal job cannot be planned (geometry out of region)."""

    def __init__(self, message: str, report: RegionReport | None = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SealCurve:
    """One sampled curve, in sealing order."""

    points: tuple[Point2, ...]
    source_index: int  # position in the caller's input list
    closed: bool
    length: float


@dataclass(frozen=True)
class SealPlan:
    stack: MaterialStack
    curves: tuple[SealCurve, ...]
    region: PrintRegion
    settings: SealingSettings
    warnings: tuple[str, ...]

    @property
    def lift_z(self) -> float:
        return self.stack.seal_z + self.settings.lift_height_offset

    @property
    def contact_length(self) -> float:
        return sum(c.length for c in self.curves)

    @property
    def travel_length(self) -> float:
        """XY travel: region origin to first curve, then between curves."""
        pos = self.region.origin
        total = 0.0
        for curve in self.curves:
            total += pos.distance_to(curve.points[0])
            pos = curve.points[-1]
        return total

    @property
    def estimated_seconds(self) -> float:
        """Rough duration: contact plus descents at seal speed, travel and
        lifts at travel speed."""
        descend = self.settings.lift_height_offset * len(self.curves)
        lift = self.settings.lift_height_offset * len(self.curves)
        contact_time = (self.contact_length + descend) / self.stack.seal_speed
        travel_time = (self.travel_length + lift) / self.settings.travel_speed
        return contact_time + travel_time


def plan_seal(
    paths,
    stack: MaterialStack,
    region: PrintRegion,
    settings: SealingSettings | None = None,
) -> SealPlan:
    """Validate, order, and sample seal curves.

    Raises :class:`SealPlanError` (with the full violation report attached)
    if any vertex falls outside the region.  Self-intersecting curves are
    legal -- crossings simply get sealed twice -- but are reported as
    warnings so unintended overlaps get noticed.
    """
    paths = list(paths)
    if not paths:
        raise SealPlanError("a seal job needs at least one curve")
    if settings is None:
        settings = SealingSettings()

    report = check_within_region(paths, region)
    if not report.ok:
        raise SealPlanError(
            "seal geometry leaves the printable region:\n" + report.describe(),
            report,
        )

    warnings: list[str] = []
    for i, path in enumerate(paths):
        if self_intersects(path):
            warnings.append(
                f"curve {i} crosses itself; the crossing point will be sealed twice"
            )

    order = order_paths(paths, origin=region.origin)
    curves: list[SealCurve] = []
    for idx in order:
        path = paths[idx]
        points = tuple(sample_path(path, settings.sample_interval))
        curves.append(SealCurve(points, idx, path.closed, path.length()))
    return SealPlan(stack, tuple(curves), region, settings, tuple(warnings))


def compile_seal(plan: SealPlan) -> GcodeProgram:
    """Generate the heat-seal G-code for a plan.

    Layout: header comments, home, heat nozzle and bed (both waiting), lift,
    travel to the first curve; then per curve descend to the seal height and
    traverse every sample point at sealing speed with the feed restated on
    each move, lift, and travel on.  The program is annotated with a
    "preamble" phase (through the first travel) and a "sealing" phase.
    """
    stack = plan.stack
    settings = plan.settings
    seal_feed = stack.seal_speed * 60.0  # mm/s -> mm/min
    travel_feed = settings.travel_speed * 60.0
    lift_z = plan.lift_z

    commands: list = [
        Comment(" heat-seal pass (no extrusion)"),
        Comment(f" stack: {stack.name}"),
        Comment(
            f" nozzle {format_temp(stack.nozzle_temp)}C,"
            f" bed {format_temp(stack.bed_temp)}C,"
            f" seal height {stack.seal_z:.3f}mm"
        ),
        Home(),
        ModeSwitch("G90"),
        NozzleTemp(celsius=stack.nozzle_temp, wait=True),
        BedTemp(celsius=stack.bed_temp, wait=True),
        Move(rapid=True, z=lift_z, f=travel_feed),
    ]
    first = plan.curves[0].points[0]
    commands.append(Move(rapid=True, x=first.x, y=first.y, f=travel_feed))
    preamble_len = len(commands)

    for k, curve in enumerate(plan.curves):
        commands.append(
            Comment(f" curve {k + 1}/{len(plan.curves)}: {len(curve.points)} points")
        )
        if k > 0:
            start = curve.points[0]
            commands.append(Move(rapid=True, x=start.x, y=start.y, f=travel_feed))
        commands.append(Move(z=stack.seal_z, f=seal_feed))
        for p in curve.points[1:]:
            commands.append(Move(x=p.x, y=p.y, f=seal_feed))
        commands.append(Move(rapid=True, z=lift_z, f=travel_feed))

    phases = (
        PhaseSpan("preamble", 0, preamble_len),
        PhaseSpan("sealing", preamble_len, len(commands)),
    )
    return GcodeProgram(tuple(commands), phases)


def format_temp(celsius: float) -> str:
    if celsius == int(celsius):
        return str(int(celsius))
    return f"{celsius:g}"
