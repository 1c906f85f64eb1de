"""Planar geometry kernel: paths, sampling, regions, ordering.

Everything is in build-plate millimeters.  All types are immutable after
construction and every operation is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from sealprint.kernels import resample_polyline

# Consecutive path vertices closer than this are considered coincident.
MIN_VERTEX_SEPARATION = 1e-9


@dataclass(frozen=True)
class Point2:
    """A 2D point in millimeters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "Point2") -> float:
        dx = other.x - self.x
        dy = other.y - self.y
        return math.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True)
class PlanarPath:
    """An ordered 2D polyline, open or closed.

    For closed paths the first vertex is not repeated at the end; closure is
    implied (the closing segment runs last vertex -> first vertex).
    """

    vertices: tuple[Point2, ...]
    closed: bool = False

    def __post_init__(self):
        verts = tuple(self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 2:
            raise ValueError("a path needs at least 2 vertices")
        for i in range(len(verts) - 1):
            if verts[i].distance_to(verts[i + 1]) <= MIN_VERTEX_SEPARATION:
                raise ValueError(f"consecutive vertices {i} and {i + 1} coincide")
        if self.closed and verts[0].distance_to(verts[-1]) <= MIN_VERTEX_SEPARATION:
            raise ValueError("closed path must not duplicate its first vertex at the end")

    @property
    def start(self) -> Point2:
        return self.vertices[0]

    @property
    def end(self) -> Point2:
        return self.vertices[0] if self.closed else self.vertices[-1]

    def length(self) -> float:
        total = 0.0
        verts = self.vertices
        for i in range(len(verts) - 1):
            total += verts[i].distance_to(verts[i + 1])
        if self.closed:
            total += verts[-1].distance_to(verts[0])
        return total

    def flat_coords(self) -> list[float]:
        """Vertices as a flat [x0, y0, x1, y1, ...] list (kernel input)."""
        flat: list[float] = []
        for p in self.vertices:
            flat.append(p.x)
            flat.append(p.y)
        return flat


def path_from_pairs(pairs, closed: bool = False) -> PlanarPath:
    """Build a PlanarPath from (x, y) pairs, dropping coincident repeats."""
    verts: list[Point2] = []
    for x, y in pairs:
        p = Point2(float(x), float(y))
        if verts and verts[-1].distance_to(p) <= MIN_VERTEX_SEPARATION:
            continue
        verts.append(p)
    if closed and len(verts) >= 2 and verts[0].distance_to(verts[-1]) <= MIN_VERTEX_SEPARATION:
        verts.pop()
    return PlanarPath(tuple(verts), closed=closed)


@dataclass(frozen=True)
class PrintRegion:
    """Axis-aligned printable rectangle: origin corner plus width x depth."""

    width: float
    depth: float
    origin: Point2 = Point2(0.0, 0.0)

    def __post_init__(self):
        if self.width <= 0 or self.depth <= 0:
            raise ValueError(f"region must have positive size, got {self.width} x {self.depth}")

    def contains(self, p: Point2) -> bool:
        # Closed-region semantics: the boundary counts as inside.
        return (
            self.origin.x <= p.x <= self.origin.x + self.width
            and self.origin.y <= p.y <= self.origin.y + self.depth
        )


@dataclass(frozen=True)
class RegionViolation:
    path_index: int
    vertex_index: int
    point: Point2

    def describe(self) -> str:
        return (
            f"path {self.path_index}, vertex {self.vertex_index} at "
            f"({self.point.x:.3f}, {self.point.y:.3f}) is outside the region"
        )


@dataclass(frozen=True)
class RegionReport:
    violations: tuple[RegionViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def describe(self) -> str:
        if self.ok:
            return "all geometry inside the print region"
        return "\n".join(v.describe() for v in self.violations)


def check_within_region(paths, region: PrintRegion) -> RegionReport:
    """List every path vertex outside the region (boundary counts as inside)."""
    violations: list[RegionViolation] = []
    for pi, path in enumerate(paths):
        for vi, p in enumerate(path.vertices):
            if not region.contains(p):
                violations.append(RegionViolation(pi, vi, p))
    return RegionReport(tuple(violations))


def flatten_svg_path(svg_path_data: str, chord_tolerance: float = 0.05):
    """Flatten an SVG path-data string into polylines.

    Curves and arcs become vertex chains whose chord deviation stays within
    ``chord_tolerance``; each Z closes a path.  Thin wrapper over the SVG
    module so geometry callers need only this entry point.
    """
    from sealprint.svgpath import parse_path_data

    return parse_path_data(svg_path_data, chord_tolerance)


def sample_path(path: PlanarPath, interval: float) -> list[Point2]:
    """Sample a path at even arc-length steps no longer than ``interval``.

    Step length is L / ceil(L / interval) over the whole path, so endpoints
    are exact and spacing never exceeds the interval.  Closed paths return
    to their start point as the final sample.
    """
    if interval <= 0:
        raise ValueError("sampling interval must be positive")
    flat = resample_polyline(path.flat_coords(), path.closed, interval)
    return [Point2(flat[i], flat[i + 1]) for i in range(0, len(flat), 2)]


def _travel_length(paths, order, origin: Point2) -> float:
    pos = origin
    total = 0.0
    for idx in order:
        total += pos.distance_to(paths[idx].start)
        pos = paths[idx].end
    return total


def order_paths(paths, origin: Point2 = Point2(0.0, 0.0)) -> list[int]:
    """Order paths to cut travel between them, greedily.

    Starts from the path whose start is closest to ``origin``, then always
    hops to the nearest remaining start point (ties broken by lower input
    index).  If the greedy tour somehow travels farther than the input
    order, the input order is kept, so the result never loses.
    """
    paths = list(paths)
    if not paths:
        raise ValueError("order_paths needs at least one path")
    remaining = list(range(len(paths)))
    order: list[int] = []
    pos = origin
    while remaining:
        best = min(remaining, key=lambda i: (pos.distance_to(paths[i].start), i))
        order.append(best)
        remaining.remove(best)
        pos = paths[best].end
    identity = list(range(len(paths)))
    if _travel_length(paths, order, origin) > _travel_length(paths, identity, origin):
        return identity
    return order


def _segments_intersect(a1, a2, b1, b2) -> bool:
    # Proper crossing test; shared endpoints do not count.
    def orient(p, q, r):
        v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
        if v > 1e-12:
            return 1
        if v < -1e-12:
            return -1
        return 0

    o1 = orient(a1, a2, b1)
    o2 = orient(a1, a2, b2)
    o3 = orient(b1, b2, a1)
    o4 = orient(b1, b2, a2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


# Self-intersection scan is quadratic; skip above this vertex count.
SELF_INTERSECTION_SCAN_LIMIT = 4000


def self_intersects(path: PlanarPath) -> bool | None:
    """True if any two non-adjacent segments of the path cross.

    Returns None when the path is too large to scan (quadratic check).
    Junction-style patterns are legal; callers warn, they do not reject.
    """
    verts = list(path.vertices)
    if path.closed:
        verts.append(verts[0])
    nseg = len(verts) - 1
    if nseg > SELF_INTERSECTION_SCAN_LIMIT:
        return None
    for i in range(nseg):
        for j in range(i + 2, nseg):
            if path.closed and i == 0 and j == nseg - 1:
                continue  # first and closing segment are adjacent
            if _segments_intersect(verts[i], verts[i + 1], verts[j], verts[j + 1]):
                return True
    return False
