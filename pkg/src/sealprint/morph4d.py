"""Planning for self-bending strips, arched release patterns, and dot textures.

A strip of sheet material with a row of printed bonding points curls when
released: fewer/narrower bonds let it bend more, wider strips bend more for
the same bonding.  The :class:`CurvatureModel` captures measured curvature
over a (strip width, bonded fraction) grid and interpolates between the
measurements; planning searches it for combinations that hit a target
curvature.  The shipped grid is a placeholder shaped like real measurements
but not taken from any machine -- it is flagged uncalibrated and callers
should surface that until the user loads their own calibration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import yaml

from sealprint.geometry import PlanarPath, Point2
from sealprint.materials import Morph4dSettings

__all__ = [
    "CalibrationError", "StripSpec", "CurvatureModel", "BendPlan",
    "ArchPattern", "ArchLayout", "DotTexture",
    "default_model", "load_calibration", "save_calibration",
    "bonded_fraction", "predict_curvature", "plan_for_curvature",
    "plan_for_circle", "generate_arch_pattern", "generate_dot_texture",
]


class CalibrationError(ValueError):
    """Raised for malformed or non-monotone calibration data."""


@dataclass(frozen=True)
class StripSpec:
    """A bending strip: its size and the bonding points printed along it."""

    width: float
    length: float
    bonding_point_count: int
    bonding_point_width: float

    def __post_init__(self):
        if self.width <= 0 or self.length <= 0 or self.bonding_point_width <= 0:
            raise ValueError("strip dimensions must be positive")
        if self.bonding_point_count < 2:
            raise ValueError("a strip needs at least 2 bonding points")
        total = self.bonding_point_count * self.bonding_point_width
        if total > self.length:
            raise ValueError(
                f"{self.bonding_point_count} points of width"
                f" {self.bonding_point_width:g} mm need {total:g} mm, more"
                f" than the {self.length:g} mm strip"
            )


def bonded_fraction(spec: StripSpec) -> float:
    """Fraction of the strip length covered by bonding points, in (0, 1]."""
    return spec.bonding_point_count * spec.bonding_point_width / spec.length


@dataclass(frozen=True)
class CurvatureModel:
    """Measured curvature (1/mm) on a (width, bonded fraction) grid.

    Rows are strip widths (ascending); columns are bonding counts
    (ascending), i.e. bonded fractions of the strip length.  Physical
    expectation, validated at construction: curvature strictly increases
    with width and strictly decreases with bonded fraction.
    """

    strip_length: float
    point_width: float
    widths: tuple[float, ...]
    counts: tuple[int, ...]
    curvature: tuple[tuple[float, ...], ...]  # [width index][count index]
    calibrated: bool = True

    def __post_init__(self):
        if self.strip_length <= 0 or self.point_width <= 0:
            raise CalibrationError("strip_length and point_width must be positive")
        if len(self.widths) < 2 or len(self.counts) < 2:
            raise CalibrationError("the grid needs at least 2 widths and 2 counts")
        if list(self.widths) != sorted(set(self.widths)):
            raise CalibrationError("widths must be strictly ascending")
        if list(self.counts) != sorted(set(self.counts)):
            raise CalibrationError("counts must be strictly ascending")
        if any(c <= 0 for c in self.counts):
            raise CalibrationError("counts must be positive")
        if self.counts[-1] * self.point_width > self.strip_length:
            raise CalibrationError(
                f"{self.counts[-1]} points of width {self.point_width} exceed"
                f" the strip length {self.strip_length}"
            )
        if len(self.curvature) != len(self.widths):
            raise CalibrationError("one curvature row per width required")
        for wi, row in enumerate(self.curvature):
            if len(row) != len(self.counts):
                raise CalibrationError(
                    f"width {self.widths[wi]}: expected {len(self.counts)}"
                    f" curvature values, got {len(row)}"
                )
            if any(v <= 0 for v in row):
                raise CalibrationError("curvature values must be positive")
            for j in range(len(row) - 1):
                if not row[j] > row[j + 1]:
                    raise CalibrationError(
                        f"width {self.widths[wi]}: curvature must strictly"
                        " decrease as the bonded fraction grows"
                        f" (violated between counts {self.counts[j]} and"
                        f" {self.counts[j + 1]})"
                    )
        for j in range(len(self.counts)):
            for wi in range(len(self.widths) - 1):
                if not self.curvature[wi][j] < self.curvature[wi + 1][j]:
                    raise CalibrationError(
                        f"count {self.counts[j]}: curvature must strictly"
                        " increase with strip width (violated between widths"
                        f" {self.widths[wi]} and {self.widths[wi + 1]})"
                    )

    def fraction_for_count(self, count: float) -> float:
        return count * self.point_width / self.strip_length

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(self.fraction_for_count(c) for c in self.counts)

    def curvature_for(self, width: float, bonded: float) -> float:
        """Bilinear interpolation; exact on grid nodes; no extrapolation."""
        widths = self.widths
        fractions = self.fractions
        if not widths[0] <= width <= widths[-1]:
            raise CalibrationError(
                f"width {width:g} outside the calibrated range"
                f" [{widths[0]:g}, {widths[-1]:g}]"
            )
        if not fractions[0] <= bonded <= fractions[-1]:
            raise CalibrationError(
                f"bonded fraction {bonded:g} outside the calibrated"
                f" range [{fractions[0]:g}, {fractions[-1]:g}]"
            )
        wi = _bracket(widths, width)
        fj = _bracket(fractions, bonded)
        w0, w1 = widths[wi], widths[wi + 1]
        f0, f1 = fractions[fj], fractions[fj + 1]
        t = (width - w0) / (w1 - w0)
        u = (bonded - f0) / (f1 - f0)
        c00 = self.curvature[wi][fj]
        c01 = self.curvature[wi][fj + 1]
        c10 = self.curvature[wi + 1][fj]
        c11 = self.curvature[wi + 1][fj + 1]
        return (
            c00 * (1 - t) * (1 - u)
            + c10 * t * (1 - u)
            + c01 * (1 - t) * u
            + c11 * t * u
        )

    def curvature_for_count(self, width: float, count: int) -> float:
        return self.curvature_for(width, self.fraction_for_count(count))


def predict_curvature(model: CurvatureModel, spec: StripSpec) -> float:
    """Curvature (1/mm) the model expects for a strip, by interpolation.

    The grid is indexed by bonded fraction, so strips of any length can be
    queried as long as their width and fraction stay inside the calibrated
    ranges; out-of-range queries raise rather than extrapolate.
    """
    return model.curvature_for(spec.width, bonded_fraction(spec))


def _bracket(values, x) -> int:
    """Index i with values[i] <= x <= values[i+1] (upper cells win ties)."""
    for i in range(len(values) - 2, -1, -1):
        if values[i] <= x:
            return i
    return 0


# Placeholder grid: plausible magnitudes and the right monotone shape for a
# 100 mm strip with 3 mm bonding points, but not measured on any machine.
_DEFAULT_GRID = {
    "strip_length": 100.0,
    "point_width": 3.0,
    "widths": (3.0, 6.0, 9.0),
    "counts": (3, 5, 7, 9, 11, 13),
    "curvature": (
        (0.072, 0.063, 0.052, 0.043, 0.035, 0.028),
        (0.085, 0.075, 0.068, 0.0625, 0.050, 0.040),
        (0.094, 0.085, 0.076, 0.069, 0.065, 0.0635),
    ),
}


def default_model() -> CurvatureModel:
    """The shipped placeholder model, flagged as uncalibrated."""
    return CurvatureModel(calibrated=False, **_DEFAULT_GRID)


def load_calibration(path: str) -> CurvatureModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise CalibrationError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise CalibrationError(f"{path}: calibration document must be a mapping")
    try:
        widths = tuple(float(w) for w in doc["widths"])
        counts = tuple(int(c) for c in doc["counts"])
        curvature = tuple(
            tuple(float(v) for v in doc["curvature"][i])
            for i in range(len(widths))
        )
        return CurvatureModel(
            strip_length=float(doc["strip_length"]),
            point_width=float(doc["point_width"]),
            widths=widths,
            counts=counts,
            curvature=curvature,
            calibrated=bool(doc.get("calibrated", True)),
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        if isinstance(exc, CalibrationError):
            raise
        raise CalibrationError(f"{path}: malformed calibration data: {exc}") from exc


def save_calibration(model: CurvatureModel, path: str) -> None:
    doc = {
        "calibrated": model.calibrated,
        "strip_length": model.strip_length,
        "point_width": model.point_width,
        "widths": list(model.widths),
        "counts": list(model.counts),
        "curvature": [list(row) for row in model.curvature],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(yaml.safe_dump(doc, sort_keys=False))


@dataclass(frozen=True)
class BendPlan:
    """One strip choice with its predicted curl against the target."""

    spec: StripSpec
    curvature: float
    target_curvature: float
    advisories: tuple[str, ...] = field(default=())

    @property
    def width(self) -> float:
        return self.spec.width

    @property
    def count(self) -> int:
        return self.spec.bonding_point_count

    @property
    def bonded_fraction(self) -> float:
        return bonded_fraction(self.spec)

    @property
    def relative_error(self) -> float:
        return abs(self.curvature - self.target_curvature) / self.target_curvature


def _plan_advisories(
    spec: StripSpec, settings: Morph4dSettings
) -> tuple[str, ...]:
    notes: list[str] = []
    span = spec.length / spec.bonding_point_count
    if span > settings.support_span_threshold:
        notes.append(
            f"{span:.1f} mm between bonding points exceeds"
            f" {settings.support_span_threshold:g} mm; print the spans over"
            " dissolvable support"
        )
    if spec.bonding_point_width < settings.interlayer_foot_threshold:
        notes.append(
            f"bonding points narrower than"
            f" {settings.interlayer_foot_threshold:g} mm hold poorly; print"
            " a thin interlayer under them"
        )
    return tuple(notes)


def plan_for_curvature(
    model: CurvatureModel,
    target: float,
    length: float | None = None,
    tolerance: float = 0.05,
    settings: Morph4dSettings | None = None,
) -> tuple[BendPlan, ...]:
    """Find strips of ``length`` that curl to ``target`` curvature (1/mm).

    Every integer bonding count whose fraction falls inside the calibrated
    range is evaluated for every calibrated width; plans within
    ``tolerance`` relative error are kept, ordered by error (ties: narrower
    width, then fewer points).  Combinations that run against the measured
    trend -- a wider strip with fewer bonding points than a narrower
    strip's best plan -- are dropped, since the calibration consistently
    pairs wider strips with more bonding.  No plan in tolerance is an
    error: the model cannot hit the target and needs recalibrating.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if target <= 0:
        raise ValueError("target curvature must be positive")
    if length is None:
        length = model.strip_length
    if length <= 0:
        raise ValueError("strip length must be positive")
    if settings is None:
        settings = Morph4dSettings()
    frac_lo = model.fractions[0]
    frac_hi = model.fractions[-1]
    lo = max(2, math.ceil(frac_lo * length / model.point_width - 1e-9))
    hi = math.floor(frac_hi * length / model.point_width + 1e-9)
    candidates: list[BendPlan] = []
    for width in model.widths:
        for count in range(lo, hi + 1):
            spec = StripSpec(width, length, count, model.point_width)
            plan = BendPlan(
                spec=spec,
                curvature=predict_curvature(model, spec),
                target_curvature=target,
                advisories=_plan_advisories(spec, settings),
            )
            if plan.relative_error <= tolerance:
                candidates.append(plan)
    candidates.sort(key=lambda p: (p.relative_error, p.width, p.count))
    if not candidates:
        raise CalibrationError(
            f"no calibrated width/count combination reaches curvature"
            f" {target:g} 1/mm within {tolerance * 100:g}% on a {length:g}"
            " mm strip; the model cannot hit the target -- recalibrate with"
            " strips measured on your machine"
        )

    # Trend filter: for each width, its best candidate sets a floor on the
    # bonding count of any wider strip's candidates.
    best_count_by_width: dict[float, int] = {}
    for plan in candidates:
        if plan.width not in best_count_by_width:
            best_count_by_width[plan.width] = plan.count
    kept: list[BendPlan] = []
    for plan in candidates:
        floor_count = max(
            (c for w, c in best_count_by_width.items() if w < plan.width),
            default=None,
        )
        if floor_count is not None and plan.count < floor_count:
            continue
        kept.append(plan)
    return tuple(kept)


def plan_for_circle(
    model: CurvatureModel,
    length: float | None = None,
    tolerance: float = 0.05,
    settings: Morph4dSettings | None = None,
) -> tuple[BendPlan, ...]:
    """Find strips of ``length`` that curl into a full circle.

    The circle's circumference is the strip length, so the target curvature
    is 2*pi / length; see :func:`plan_for_curvature` for ranking rules.
    """
    if length is None:
        length = model.strip_length
    if length <= 0:
        raise ValueError("strip length must be positive")
    return plan_for_curvature(
        model, 2.0 * math.pi / length, length, tolerance, settings
    )


@dataclass(frozen=True)
class ArchPattern:
    """A row of bonded feet with free spans arching up between them.

    ``count`` is the number of arches; the pattern bonds ``count + 1`` feet,
    one at the start of each span plus one closing foot.  ``span`` is the
    start-to-start distance between neighboring feet and must leave a real
    arch between them (more than half the span unbonded).
    """

    span: float
    foot_width: float
    arch_height: float
    count: int

    def __post_init__(self):
        if self.span <= 0 or self.foot_width <= 0 or self.arch_height <= 0:
            raise ValueError("span, foot_width, and arch_height must be positive")
        if self.count < 1:
            raise ValueError("an arch pattern needs at least 1 arch")
        if not self.span > 2.0 * self.foot_width:
            raise ValueError(
                f"span {self.span:g} must exceed twice the foot width"
                f" {self.foot_width:g}, or the feet crowd out the arches"
            )


@dataclass(frozen=True)
class ArchLayout:
    """Where an arch pattern touches its base path."""

    pattern: ArchPattern
    base_length: float
    feet: tuple[tuple[float, float], ...]  # (start, end) arc lengths
    foot_paths: tuple[PlanarPath, ...]
    advisories: tuple[str, ...]

    @property
    def bonded_fraction(self) -> float:
        total = sum(b - a for a, b in self.feet)
        return total / self.base_length

    @property
    def clear_gap(self) -> float:
        return self.pattern.span - self.pattern.foot_width

    def describe_profile(self) -> str:
        return (
            f"{self.pattern.count} arch(es) rising {self.pattern.arch_height:g}"
            f" mm over {self.clear_gap:g} mm clear spans between"
            f" {self.pattern.foot_width:g} mm bonded feet"
        )


def _subpath_between(path: PlanarPath, s0: float, s1: float) -> PlanarPath:
    """The piece of an open path between arc lengths s0 and s1."""
    pts = path.vertices
    out: list[Point2] = []
    walked = 0.0
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        seg = a.distance_to(b)
        if seg <= 0.0:
            continue
        lo = max(s0, walked)
        hi = min(s1, walked + seg)
        if lo < hi or (not out and lo == hi):
            for s in ((lo, hi) if hi > lo else (lo,)):
                t = (s - walked) / seg
                p = Point2(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
                if not out or out[-1].distance_to(p) > 1e-12:
                    out.append(p)
        walked += seg
    if len(out) < 2:
        # Degenerate slice (zero-length foot on a vertex); widen minimally.
        raise ValueError("foot interval collapsed to a point on the base path")
    return PlanarPath(tuple(out), closed=False)


def generate_arch_pattern(
    spec: ArchPattern,
    base: PlanarPath,
    settings: Morph4dSettings | None = None,
) -> ArchLayout:
    """Lay the pattern's feet along an open base path.

    Foot j occupies arc lengths [j*span, j*span + foot_width] for
    j = 0..count, so ``count`` arches leave ``count + 1`` bonded feet.  The
    base must be long enough for the final foot.  Advisories flag spans
    needing dissolvable support and feet too narrow to hold.
    """
    if settings is None:
        settings = Morph4dSettings()
    if base.closed:
        raise ValueError("the arch base must be an open path")
    base_length = base.length()
    needed = spec.count * spec.span + spec.foot_width
    if base_length < needed:
        raise ValueError(
            f"base of {base_length:g} mm is shorter than the pattern:"
            f" {spec.count} arch(es) of {spec.span:g} mm plus the closing"
            f" foot need {needed:g} mm"
        )
    feet = tuple(
        (j * spec.span, j * spec.span + spec.foot_width)
        for j in range(spec.count + 1)
    )
    foot_paths = tuple(_subpath_between(base, a, b) for a, b in feet)
    advisories: list[str] = []
    if spec.span > settings.support_span_threshold:
        advisories.append(
            f"{spec.span:g} mm spans exceed"
            f" {settings.support_span_threshold:g} mm; print the arches over"
            " dissolvable support"
        )
    if spec.foot_width < settings.interlayer_foot_threshold:
        advisories.append(
            f"feet narrower than {settings.interlayer_foot_threshold:g} mm"
            " hold poorly; print a thin interlayer under them"
        )
    return ArchLayout(spec, base_length, feet, foot_paths, tuple(advisories))


@dataclass(frozen=True)
class DotTexture:
    """Hexagonally packed bonding dots inside a rectangle."""

    width: float
    height: float
    diameter: float
    pitch: float
    centers: tuple[tuple[float, float], ...]

    @property
    def coverage(self) -> float:
        r = self.diameter / 2.0
        return len(self.centers) * math.pi * r * r / (self.width * self.height)


def generate_dot_texture(
    width: float, height: float, diameter: float, pitch: float
) -> DotTexture:
    """Pack bonding dots hexagonally: rows pitch*sqrt(3)/2 apart, every
    other row shifted half a pitch.  Dots stay wholly inside the rectangle.
    """
    if width <= 0 or height <= 0:
        raise ValueError("texture area must have positive size")
    if diameter <= 0:
        raise ValueError("dot diameter must be positive")
    if pitch < diameter:
        raise ValueError(
            f"pitch {pitch:g} smaller than diameter {diameter:g} would"
            " overlap the dots"
        )
    r = diameter / 2.0
    if diameter > min(width, height):
        raise ValueError(
            f"dot diameter {diameter:g} does not fit the"
            f" {width:g} x {height:g} area"
        )
    row_step = pitch * math.sqrt(3.0) / 2.0
    centers: list[tuple[float, float]] = []
    j = 0
    y = r
    while y <= height - r + 1e-9:
        x = r + (pitch / 2.0 if j % 2 else 0.0)
        while x <= width - r + 1e-9:
            centers.append((x, y))
            x += pitch
        y += row_step
        j += 1
    return DotTexture(width, height, diameter, pitch, tuple(centers))
