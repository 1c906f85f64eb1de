"""Alignment markers and hybrid job merging.

A hybrid job runs in two phases on one machine: first the heat-seal pass
(curves traced on layered sheets), then a regular 3D print on top.  The
part is exported with a small cross-shaped alignment marker; wherever the
slicer placed that marker on the plate tells us how far the sliced job
drifted from design coordinates.  Merging recovers that offset from the
sliced file's first layer, strips the marker's moves (it must not actually
print), clamps bed temperatures so the sheets stay cool, shifts the print
back into design coordinates, and splices everything together with an
audible pause between the phases.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass

import numpy as np

from sealprint.gcode import (
    Comment,
    GcodeProgram,
    Home,
    Move,
    Passthrough,
    PauseMacro,
    PhaseSpan,
    SetPosition,
    Tone,
    emit,
    parse,
    rewrite_bed_temps,
    translate_xy,
)
from sealprint.geometry import Point2
from sealprint.materials import Profile
from sealprint.motion import replay
from sealprint.sealer import SealPlan, compile_seal
from sealprint.stl import TriangleMesh, combine

__all__ = [
    "AlignmentMarker", "FabJob", "MergeError", "MarkerNotFoundError",
    "AmbiguousMarkerError", "OffsetResult", "StripResult", "MergeResult",
    "ALIGNMENT_TOLERANCE", "marker_outline", "export_marker_mesh",
    "export_parts_with_marker", "recover_offset", "strip_marker_moves",
    "merge",
]

# Jobs whose recovered offset is within this distance count as aligned.
ALIGNMENT_TOLERANCE = 0.05  # mm

# Endpoints closer than this belong to the same first-layer cluster.
_CLUSTER_TOLERANCE = 1.0  # mm

_G28_RE = re.compile(r"\s*[Gg]28\b")


class MergeError(ValueError):
    """Base error for merge failures; ``code`` is a stable identifier."""

    code = "merge_failed"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class MarkerNotFoundError(MergeError):
    code = "marker_not_found"


class AmbiguousMarkerError(MergeError):
    code = "marker_ambiguous"


@dataclass(frozen=True)
class AlignmentMarker:
    """A printable cross used to align the sliced job with the seal pass.

    The cross spans ``arm_length`` in both X and Y, with strokes
    ``arm_width`` wide, extruded ``height`` tall, centered on ``center``
    in design coordinates.
    """

    center: Point2 = Point2(5.0, 5.0)
    arm_length: float = 10.0
    arm_width: float = 1.2
    height: float = 0.2

    def __post_init__(self):
        if self.arm_length <= 0 or self.arm_width <= 0 or self.height <= 0:
            raise ValueError("marker dimensions must be positive")
        if self.arm_length < 4.0 * self.arm_width:
            raise ValueError(
                "marker arm_length must be at least 4x arm_width"
                " (the shape must read as a cross)"
            )
        if self.height > 0.4:
            raise ValueError(
                "marker height must be at most 0.4 mm so it slices to a"
                " layer or two that the merge step can strip"
            )


def marker_outline(marker: AlignmentMarker) -> list[Point2]:
    """The cross footprint as a 12-vertex counterclockwise polygon."""
    h = marker.arm_length / 2.0
    w = marker.arm_width / 2.0
    cx = marker.center.x
    cy = marker.center.y
    corners = [
        (h, -w), (h, w), (w, w), (w, h), (-w, h), (-w, w),
        (-h, w), (-h, -w), (-w, -w), (-w, -h), (w, -h), (w, -w),
    ]
    return [Point2(cx + x, cy + y) for x, y in corners]


def export_marker_mesh(marker: AlignmentMarker) -> TriangleMesh:
    """The marker as a watertight prism: exactly 44 triangles.

    Cross footprint split into five rectangles (center square plus four
    arms): 10 top triangles, 10 mirrored bottom triangles, and 24 wall
    triangles over the 12 outline edges.
    """
    h = marker.arm_length / 2.0
    w = marker.arm_width / 2.0
    cx = marker.center.x
    cy = marker.center.y
    z0, z1 = 0.0, marker.height

    # Five counterclockwise rectangles tiling the cross.
    rects = [
        [(-w, -w), (w, -w), (w, w), (-w, w)],      # center
        [(w, -w), (h, -w), (h, w), (w, w)],        # +x arm
        [(-w, w), (w, w), (w, h), (-w, h)],        # +y arm
        [(-h, -w), (-w, -w), (-w, w), (-h, w)],    # -x arm
        [(-w, -h), (w, -h), (w, -w), (-w, -w)],    # -y arm
    ]
    triangles: list[list[tuple[float, float, float]]] = []

    def at(p, z):
        return (cx + p[0], cy + p[1], z)

    for rect in rects:
        p0, p1, p2, p3 = rect
        # Top face, normal +z.
        triangles.append([at(p0, z1), at(p1, z1), at(p2, z1)])
        triangles.append([at(p0, z1), at(p2, z1), at(p3, z1)])
        # Bottom face, reversed winding for -z.
        triangles.append([at(p0, z0), at(p2, z0), at(p1, z0)])
        triangles.append([at(p0, z0), at(p3, z0), at(p2, z0)])

    outline = [
        (h, -w), (h, w), (w, w), (w, h), (-w, h), (-w, w),
        (-h, w), (-h, -w), (-w, -w), (-w, -h), (w, -h), (w, -w),
    ]
    for i in range(len(outline)):
        a = outline[i]
        b = outline[(i + 1) % len(outline)]
        a0, b0 = at(a, z0), at(b, z0)
        a1, b1 = at(a, z1), at(b, z1)
        triangles.append([a0, b0, b1])
        triangles.append([a0, b1, a1])

    return TriangleMesh(np.array(triangles, dtype=np.float64))


def export_parts_with_marker(parts, marker: AlignmentMarker) -> TriangleMesh:
    """Bundle part meshes with the marker mesh into one export.

    Parts are taken as already positioned in design coordinates; the marker
    is appended at its own center.  Slice the combined file as one object.
    An empty part list still yields a valid (marker-only) mesh but warns,
    since exporting before adding parts is usually a mistake.
    """
    parts = list(parts)
    if not parts:
        warnings.warn(
            "no part meshes given; exporting a marker-only file",
            stacklevel=2,
        )
    meshes = parts + [export_marker_mesh(marker)]
    return combine(meshes)


@dataclass(frozen=True)
class OffsetResult:
    """Recovered plate offset: where the marker printed minus the design."""

    dx: float
    dy: float
    centroid: Point2
    segment_count: int

    @property
    def distance(self) -> float:
        return math.sqrt(self.dx * self.dx + self.dy * self.dy)

    @property
    def aligned(self) -> bool:
        return self.distance <= ALIGNMENT_TOLERANCE


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _cluster_segments(segments):
    """Group segments whose endpoints touch (within the cluster tolerance).

    Spatial hashing keeps this near-linear: endpoints are binned into a
    grid of tolerance-sized cells and only neighboring cells are compared.
    """
    n = len(segments)
    uf = _UnionFind(n)
    cell = _CLUSTER_TOLERANCE
    grid: dict[tuple[int, int], list[int]] = {}
    tol_sq = _CLUSTER_TOLERANCE * _CLUSTER_TOLERANCE

    def key(p):
        return (int(math.floor(p[0] / cell)), int(math.floor(p[1] / cell)))

    endpoints = []
    for i, (a, b) in enumerate(segments):
        endpoints.append((a, i))
        endpoints.append((b, i))
    for p, i in endpoints:
        grid.setdefault(key(p), []).append((p, i))
    for (gx, gy), items in grid.items():
        neighbors = []
        for ox in (-1, 0, 1):
            for oy in (-1, 0, 1):
                neighbors.extend(grid.get((gx + ox, gy + oy), ()))
        for p, i in items:
            for q, j in neighbors:
                if i == j:
                    continue
                dx = p[0] - q[0]
                dy = p[1] - q[1]
                if dx * dx + dy * dy <= tol_sq:
                    uf.union(i, j)

    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(uf.find(i), []).append(i)
    return list(clusters.values())


def _segment_stats(segments, indices):
    """Length, length-weighted centroid, bbox, and axis-class breakdown."""
    total = 0.0
    mx = 0.0
    my = 0.0
    xs: list[float] = []
    ys: list[float] = []
    h_len = v_len = 0.0
    h_mx = h_my = v_mx = v_my = 0.0
    h_my2 = v_mx2 = 0.0
    for i in indices:
        (x0, y0), (x1, y1) = segments[i]
        dx = x1 - x0
        dy = y1 - y0
        length = math.sqrt(dx * dx + dy * dy)
        midx = (x0 + x1) / 2.0
        midy = (y0 + y1) / 2.0
        total += length
        mx += midx * length
        my += midy * length
        xs.extend((x0, x1))
        ys.extend((y0, y1))
        if abs(dy) <= 0.25 * abs(dx):
            h_len += length
            h_mx += midx * length
            h_my += midy * length
            h_my2 += midy * midy * length
        elif abs(dx) <= 0.25 * abs(dy):
            v_len += length
            v_mx += midx * length
            v_my += midy * length
            v_mx2 += midx * midx * length
    if total <= 0:
        return None
    centroid = (mx / total, my / total)
    bbox = (min(xs), min(ys), max(xs), max(ys))
    h_centroid = (h_mx / h_len, h_my / h_len) if h_len > 0 else None
    v_centroid = (v_mx / v_len, v_my / v_len) if v_len > 0 else None
    # Cross-axis spread: how far each stroke class scatters off its own
    # centerline (length-weighted standard deviation).
    h_spread = v_spread = None
    if h_len > 0:
        var = h_my2 / h_len - (h_my / h_len) ** 2
        h_spread = math.sqrt(max(var, 0.0))
    if v_len > 0:
        var = v_mx2 / v_len - (v_mx / v_len) ** 2
        v_spread = math.sqrt(max(var, 0.0))
    return {
        "length": total,
        "centroid": centroid,
        "bbox": bbox,
        "h_len": h_len,
        "v_len": v_len,
        "h_centroid": h_centroid,
        "v_centroid": v_centroid,
        "h_spread": h_spread,
        "v_spread": v_spread,
    }


def _looks_like_marker(stats, marker: AlignmentMarker) -> bool:
    """Cross signature: L x L bounding box (within 20%), substantial
    horizontal and vertical stroke sets whose centroids coincide and
    whose strokes stay packed along their own arm.

    The spread test is what separates a cross from a square of similar
    size: a square's horizontal strokes (walls or fill passes) scatter
    across the whole bounding box, while a cross keeps them inside one
    thin arm.
    """
    if stats is None:
        return False
    lo = 0.8 * marker.arm_length
    hi = 1.2 * marker.arm_length
    x0, y0, x1, y1 = stats["bbox"]
    if not (lo <= x1 - x0 <= hi and lo <= y1 - y0 <= hi):
        return False
    need = 0.5 * marker.arm_length
    if stats["h_len"] < need or stats["v_len"] < need:
        return False
    hc = stats["h_centroid"]
    vc = stats["v_centroid"]
    near = 0.3 * marker.arm_length
    if abs(hc[0] - vc[0]) > near or abs(hc[1] - vc[1]) > near:
        return False
    packed = 0.25 * marker.arm_length
    return stats["h_spread"] <= packed and stats["v_spread"] <= packed


def recover_offset(program: GcodeProgram, marker: AlignmentMarker) -> OffsetResult:
    """Find the printed marker on the first layer and measure its drift.

    First-layer extrusions are clustered by touching endpoints; a cluster
    matching the cross signature gives the marker's printed center (its
    length-weighted centroid).  Exactly one match is required.
    """
    from sealprint.motion import first_layer_extrusions

    if not program.layer_marks:
        raise MergeError(
            "the sliced file has no layer markers (\";LAYER_CHANGE\" or"
            " \";LAYER:<n>\" comments); cannot locate the first layer",
            code="no_layer_marks",
        )
    segments = first_layer_extrusions(program)
    if not segments:
        raise MarkerNotFoundError(
            "the first layer contains no extruding moves; cannot search"
            " for the alignment marker"
        )
    clusters = _cluster_segments(segments)
    matches = []
    for indices in clusters:
        stats = _segment_stats(segments, indices)
        if _looks_like_marker(stats, marker):
            matches.append((stats, len(indices)))
    if not matches:
        raise MarkerNotFoundError(
            "no cross-shaped cluster found on the first layer; check that"
            " the alignment marker survived slicing and sits on layer one"
        )
    if len(matches) > 1:
        spots = ", ".join(
            f"({s['centroid'][0]:.2f}, {s['centroid'][1]:.2f})" for s, _ in matches
        )
        raise AmbiguousMarkerError(
            f"{len(matches)} marker-like clusters found at {spots}; clear"
            " other small crosses from the plate or move the marker"
        )
    stats, seg_count = matches[0]
    centroid = Point2(stats["centroid"][0], stats["centroid"][1])
    return OffsetResult(
        dx=centroid.x - marker.center.x,
        dy=centroid.y - marker.center.y,
        centroid=centroid,
        segment_count=seg_count,
    )


# Padding around the marker bbox when deciding which moves belong to it.
_STRIP_PADDING = 0.5  # mm


@dataclass(frozen=True)
class StripResult:
    program: GcodeProgram
    removed_commands: int
    removed_length: float
    inserted_resets: int


def strip_marker_moves(
    program: GcodeProgram, marker: AlignmentMarker, offset: OffsetResult
) -> StripResult:
    """Remove the marker's moves from the first layer.

    A move is stripped when it extrudes with both endpoints inside the
    marker's padded bounding box (at its recovered position), together with
    the travel moves that lead into such a run.  In absolute extrusion mode
    a G92 E reset is inserted after each removed run so the following moves
    extrude only their own material.

    Safety guard: if the removed extrusion length exceeds what a marker
    could plausibly produce -- more than 12x the arm length and more than
    5% of the first layer's extrusion -- the strip is refused, since part
    geometry probably overlaps the marker area.
    """
    marks = program.layer_marks
    if not marks:
        raise MergeError(
            "cannot strip marker moves: the file has no layer markers",
            code="no_layer_marks",
        )
    start = marks[0].index
    stop = marks[1].index if len(marks) > 1 else len(program.commands)

    half = marker.arm_length / 2.0 + _STRIP_PADDING
    cx = marker.center.x + offset.dx
    cy = marker.center.y + offset.dy
    x_lo, x_hi = cx - half, cx + half
    y_lo, y_hi = cy - half, cy + half

    def inside(p) -> bool:
        return x_lo <= p[0] <= x_hi and y_lo <= p[1] <= y_hi

    result = replay(program)
    seg_by_index = {seg.command_index: seg for seg in result.segments}

    remove: set[int] = set()
    removed_length = 0.0
    total_first_layer = 0.0
    # Pass 1: extruding moves fully inside the box.
    for seg in result.segments:
        if not (start <= seg.command_index < stop):
            continue
        if seg.extrudes and seg.start is not None and seg.end is not None:
            total_first_layer += seg.xy_length()
            if inside(seg.start) and inside(seg.end):
                remove.add(seg.command_index)
                removed_length += seg.xy_length()
    if not remove:
        raise MergeError(
            "no first-layer extrusions found inside the marker area; the"
            " marker was located but its moves could not be isolated",
            code="strip_failed",
        )
    # Pass 2: travel runs that lead into a removed move and end in the box.
    ordered = [s for s in result.segments if start <= s.command_index < stop]
    for pos, seg in enumerate(ordered):
        if seg.command_index not in remove:
            continue
        back = pos - 1
        while back >= 0:
            prev = ordered[back]
            if prev.command_index in remove:
                break
            if prev.extrudes or prev.end is None or not inside(prev.end):
                break
            remove.add(prev.command_index)
            back -= 1

    guard = max(12.0 * marker.arm_length, 0.05 * total_first_layer)
    if removed_length > guard:
        raise MergeError(
            f"refusing to strip {removed_length:.1f} mm of extrusion around"
            f" the marker (limit {guard:.1f} mm); part geometry appears to"
            " overlap the marker area -- move the marker clear of the part",
            code="strip_too_large",
        )

    # Absolute-E programs need a G92 E reset after each removed run.
    commands: list = []
    inserted = 0
    i = 0
    n = len(program.commands)
    while i < n:
        if i not in remove:
            commands.append(program.commands[i])
            i += 1
            continue
        run_end = i
        last_seg = None
        while run_end < n and run_end in remove:
            if run_end in seg_by_index:
                last_seg = seg_by_index[run_end]
            run_end += 1
        if _run_has_absolute_e(program.commands, i, run_end) and last_seg is not None:
            commands.append(
                SetPosition(
                    e=last_seg.e_end,
                    comment=" extruder reset after removed marker moves",
                )
            )
            inserted += 1
        i = run_end

    stripped = GcodeProgram(
        tuple(commands),
        (PhaseSpan("printing", 0, len(commands)),),
        program.diagnostics,
    )
    return StripResult(stripped, len(remove), removed_length, inserted)


def _run_has_absolute_e(commands, start: int, stop: int) -> bool:
    for i in range(start, stop):
        cmd = commands[i]
        if isinstance(cmd, Move) and cmd.e is not None and not cmd.relative_e:
            return True
    return False


@dataclass(frozen=True)
class FabJob:
    """Everything needed to fuse one seal pass and one sliced print.

    The pause macro, alert tones, and bed-temperature ceiling come from the
    profile's printer settings.
    """

    plan: SealPlan
    print_program: GcodeProgram
    marker: AlignmentMarker
    profile: Profile


@dataclass(frozen=True)
class MergeResult:
    program: GcodeProgram
    offset: OffsetResult
    strip: StripResult
    bed_rewrites: int
    warnings: tuple[str, ...]

    @property
    def text(self) -> str:
        return emit(self.program)


def _check_no_rehoming(program: GcodeProgram) -> None:
    marks = program.layer_marks
    if not marks:
        return
    first = marks[0].index
    for i in range(first, len(program.commands)):
        cmd = program.commands[i]
        if isinstance(cmd, Home):
            raise MergeError(
                f"print file re-homes after the first layer begins (line"
                f" {cmd.line}); homing would drag the nozzle across the"
                " sealed workpiece",
                code="rehome_after_start",
            )
        if isinstance(cmd, Passthrough) and _G28_RE.match(cmd.text):
            raise MergeError(
                f"print file re-homes after the first layer begins (line"
                f" {cmd.line}); homing would drag the nozzle across the"
                " sealed workpiece",
                code="rehome_after_start",
            )


def merge(job: FabJob) -> MergeResult:
    """Splice a seal plan and a sliced print into one aligned hybrid job.

    Steps: validate the print file (layer markers present, no re-homing
    once printing starts), recover the marker offset, strip the marker's
    moves, clamp bed temperatures to the profile ceiling so the sealed
    sheets are not reheated, shift the print back into design coordinates,
    then emit seal phase + alert/pause block + print phase.
    """
    print_program = job.print_program
    if not print_program.layer_marks:
        raise MergeError(
            "the sliced file has no layer markers; merging needs them to"
            " find the first layer",
            code="no_layer_marks",
        )
    _check_no_rehoming(print_program)

    offset = recover_offset(print_program, job.marker)
    strip = strip_marker_moves(print_program, job.marker, offset)
    clamped, bed_rewrites = rewrite_bed_temps(
        strip.program, job.profile.printer.bed_ceiling
    )
    shifted = translate_xy(clamped, -offset.dx, -offset.dy)

    seal_program = compile_seal(job.plan)
    commands: list = list(seal_program.commands)
    preamble_span = seal_program.phase_span("preamble")
    sealing_span = seal_program.phase_span("sealing")

    pause_start = len(commands)
    commands.append(
        Comment(" sealing done; machine pauses so the plate can be checked")
    )
    for freq, ms in job.profile.printer.effective_tones:
        commands.append(Tone(frequency=freq, milliseconds=ms))
    commands.append(PauseMacro(job.profile.printer.pause_macro))
    pause_stop = len(commands)

    print_start = len(commands)
    commands.extend(shifted.program.commands)
    print_stop = len(commands)
    commands.append(Comment(" end of hybrid job"))

    phases = (
        PhaseSpan("preamble", preamble_span.start, preamble_span.stop),
        PhaseSpan("sealing", sealing_span.start, sealing_span.stop),
        PhaseSpan("pause", pause_start, pause_stop),
        PhaseSpan("printing", print_start, print_stop),
        PhaseSpan("postamble", print_stop, len(commands)),
    )
    program = GcodeProgram(tuple(commands), phases, print_program.diagnostics)
    return MergeResult(program, offset, strip, bed_rewrites, shifted.warnings)


def parse_print_file(text: str) -> GcodeProgram:
    """Parse sliced G-code for merging (thin alias kept for discoverability)."""
    return parse(text)
