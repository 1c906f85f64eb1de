"""SVG path-data parsing and flattening to polylines.

Supports the commands M, L, H, V, C, Q, A, Z in absolute and relative form.
Curves are flattened adaptively: a Bezier span is subdivided until every
control point sits within the chord tolerance of the chord, and an arc is
subdivided until the sagitta of each piece is within tolerance.  Straight
input therefore passes through with vertices unchanged, so flattening a
polyline-only path is idempotent.
"""

from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from sealprint.geometry import PlanarPath, path_from_pairs

DEFAULT_CHORD_TOLERANCE = 0.05  # mm

_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_COMMAND_CHARS = set("MmLlHhVvCcQqAaZzSsTt")

# Guard against pathological tolerance/geometry combinations.
_MAX_SUBDIVISION_DEPTH = 24


class SvgPathError(ValueError):
    """Raised when path data cannot be parsed or uses unsupported commands."""


@dataclass
class _Tokenizer:
    text: str
    pos: int = 0
    command_index: int = -1  # index of the command currently being consumed

    def _skip_separators(self):
        n = len(self.text)
        while self.pos < n and (self.text[self.pos].isspace() or self.text[self.pos] == ","):
            self.pos += 1

    def peek_command(self) -> str | None:
        self._skip_separators()
        if self.pos >= len(self.text):
            return None
        c = self.text[self.pos]
        return c if c in _COMMAND_CHARS else ""

    def take_command(self) -> str:
        c = self.text[self.pos]
        self.pos += 1
        self.command_index += 1
        return c

    def take_number(self, what: str) -> float:
        self._skip_separators()
        m = _NUMBER_RE.match(self.text, self.pos)
        if not m:
            got = self.text[self.pos : self.pos + 8] or "end of data"
            raise SvgPathError(
                f"command {self.command_index}: expected {what}, got {got!r}"
            )
        self.pos = m.end()
        return float(m.group())

    def take_flag(self, what: str) -> int:
        # Arc flags are single characters 0/1; they may be packed without
        # separators ("1 0 01 10,10" is legal SVG).
        self._skip_separators()
        if self.pos >= len(self.text) or self.text[self.pos] not in "01":
            got = self.text[self.pos : self.pos + 8] or "end of data"
            raise SvgPathError(
                f"command {self.command_index}: expected {what} flag (0 or 1), got {got!r}"
            )
        c = self.text[self.pos]
        self.pos += 1
        return int(c)

    def at_end(self) -> bool:
        self._skip_separators()
        return self.pos >= len(self.text)

    def more_arguments(self) -> bool:
        """True when the next token continues the current command's arguments."""
        self._skip_separators()
        if self.pos >= len(self.text):
            return False
        return self.text[self.pos] not in _COMMAND_CHARS


def _point_to_chord_distance(p, a, b) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx = bx - ax
    dy = by - ay
    seg_len_sq = dx * dx + dy * dy
    if seg_len_sq <= 1e-24:
        ex = px - ax
        ey = py - ay
        return math.sqrt(ex * ex + ey * ey)
    # Distance to the infinite chord line; for flatness that is the right
    # measure (control points can "overhang" the chord ends).
    return abs(dx * (py - ay) - dy * (px - ax)) / math.sqrt(seg_len_sq)


def _flatten_cubic(p0, p1, p2, p3, tol, out, depth=0):
    if depth >= _MAX_SUBDIVISION_DEPTH or (
        _point_to_chord_distance(p1, p0, p3) <= tol
        and _point_to_chord_distance(p2, p0, p3) <= tol
    ):
        out.append(p3)
        return
    # de Casteljau split at t = 0.5
    m01 = ((p0[0] + p1[0]) * 0.5, (p0[1] + p1[1]) * 0.5)
    m12 = ((p1[0] + p2[0]) * 0.5, (p1[1] + p2[1]) * 0.5)
    m23 = ((p2[0] + p3[0]) * 0.5, (p2[1] + p3[1]) * 0.5)
    m012 = ((m01[0] + m12[0]) * 0.5, (m01[1] + m12[1]) * 0.5)
    m123 = ((m12[0] + m23[0]) * 0.5, (m12[1] + m23[1]) * 0.5)
    mid = ((m012[0] + m123[0]) * 0.5, (m012[1] + m123[1]) * 0.5)
    _flatten_cubic(p0, m01, m012, mid, tol, out, depth + 1)
    _flatten_cubic(mid, m123, m23, p3, tol, out, depth + 1)


def _flatten_quadratic(p0, p1, p2, tol, out, depth=0):
    if depth >= _MAX_SUBDIVISION_DEPTH or _point_to_chord_distance(p1, p0, p2) <= tol:
        out.append(p2)
        return
    m01 = ((p0[0] + p1[0]) * 0.5, (p0[1] + p1[1]) * 0.5)
    m12 = ((p1[0] + p2[0]) * 0.5, (p1[1] + p2[1]) * 0.5)
    mid = ((m01[0] + m12[0]) * 0.5, (m01[1] + m12[1]) * 0.5)
    _flatten_quadratic(p0, m01, mid, tol, out, depth + 1)
    _flatten_quadratic(mid, m12, p2, tol, out, depth + 1)


def _arc_to_center(p0, rx, ry, phi_deg, large_arc, sweep, p1):
    """Endpoint to center parameterization (SVG 1.1 appendix B.2.4).

    Returns (cx, cy, rx, ry, cos_phi, sin_phi, theta1, delta_theta) or None
    when the endpoints coincide (the arc is a no-op).
    """
    x0, y0 = p0
    x1, y1 = p1
    if abs(x0 - x1) < 1e-12 and abs(y0 - y1) < 1e-12:
        return None
    rx = abs(rx)
    ry = abs(ry)
    if rx < 1e-12 or ry < 1e-12:
        return None  # zero radius: treated as a straight line per the SVG spec
    phi = math.radians(phi_deg % 360.0)
    cos_phi = math.cos(phi)
    sin_phi = math.sin(phi)
    # Step 1: transform to the ellipse-aligned frame.
    dx2 = (x0 - x1) / 2.0
    dy2 = (y0 - y1) / 2.0
    x1p = cos_phi * dx2 + sin_phi * dy2
    y1p = -sin_phi * dx2 + cos_phi * dy2
    # Correct out-of-range radii.
    lam = (x1p * x1p) / (rx * rx) + (y1p * y1p) / (ry * ry)
    if lam > 1.0:
        scale = math.sqrt(lam)
        rx *= scale
        ry *= scale
    # Step 2: center in the ellipse frame.
    num = rx * rx * ry * ry - rx * rx * y1p * y1p - ry * ry * x1p * x1p
    den = rx * rx * y1p * y1p + ry * ry * x1p * x1p
    coef_sq = max(0.0, num / den)
    coef = math.sqrt(coef_sq)
    if large_arc == sweep:
        coef = -coef
    cxp = coef * rx * y1p / ry
    cyp = -coef * ry * x1p / rx
    # Step 3: center in user space.
    cx = cos_phi * cxp - sin_phi * cyp + (x0 + x1) / 2.0
    cy = sin_phi * cxp + cos_phi * cyp + (y0 + y1) / 2.0

    def angle(ux, uy, vx, vy):
        dot = ux * vx + uy * vy
        norm = math.sqrt((ux * ux + uy * uy) * (vx * vx + vy * vy))
        a = math.acos(max(-1.0, min(1.0, dot / norm)))
        if ux * vy - uy * vx < 0:
            a = -a
        return a

    theta1 = angle(1.0, 0.0, (x1p - cxp) / rx, (y1p - cyp) / ry)
    delta = angle(
        (x1p - cxp) / rx, (y1p - cyp) / ry, (-x1p - cxp) / rx, (-y1p - cyp) / ry
    )
    if not sweep and delta > 0:
        delta -= 2 * math.pi
    elif sweep and delta < 0:
        delta += 2 * math.pi
    return cx, cy, rx, ry, cos_phi, sin_phi, theta1, delta


def _flatten_arc(p0, rx, ry, phi_deg, large_arc, sweep, p1, tol, out):
    params = _arc_to_center(p0, rx, ry, phi_deg, large_arc, sweep, p1)
    if params is None:
        if abs(p0[0] - p1[0]) > 1e-12 or abs(p0[1] - p1[1]) > 1e-12:
            out.append(p1)  # degenerate radius: straight line
        return
    cx, cy, rx, ry, cos_phi, sin_phi, theta1, delta = params
    # Pieces sized so each circular-arc sagitta r*(1-cos(step/2)) <= tol.
    r = max(rx, ry)
    if tol >= r:
        max_step = math.pi / 2
    else:
        max_step = 2.0 * math.acos(max(-1.0, min(1.0, 1.0 - tol / r)))
        max_step = max(max_step, 1e-3)
    n = max(1, int(math.ceil(abs(delta) / max_step)))

    def point_at(theta):
        x = rx * math.cos(theta)
        y = ry * math.sin(theta)
        return (cos_phi * x - sin_phi * y + cx, sin_phi * x + cos_phi * y + cy)

    for k in range(1, n):
        out.append(point_at(theta1 + delta * k / n))
    out.append(p1)


def parse_path_data(
    data: str, chord_tolerance: float = DEFAULT_CHORD_TOLERANCE
) -> list[PlanarPath]:
    """Parse SVG path data into flattened polylines.

    Each M/m begins a new subpath; Z/z closes the current one.  Unsupported
    commands (including the shorthand curves S/T) raise :class:`SvgPathError`
    naming the zero-based command index.  Subpaths that flatten to a single
    point are rejected.
    """
    if chord_tolerance <= 0:
        raise ValueError("chord tolerance must be positive")
    tok = _Tokenizer(data)
    paths: list[PlanarPath] = []
    points: list[tuple[float, float]] = []
    cur = (0.0, 0.0)
    subpath_start = (0.0, 0.0)
    have_subpath = False

    def finish_subpath(closed: bool):
        nonlocal points, have_subpath
        if not have_subpath:
            return
        deduped: list[tuple[float, float]] = []
        for p in points:
            if deduped and math.dist(deduped[-1], p) <= 1e-9:
                continue
            deduped.append(p)
        if closed and len(deduped) >= 2 and math.dist(deduped[0], deduped[-1]) <= 1e-9:
            deduped.pop()
        if len(deduped) < 2:
            raise SvgPathError(
                f"command {tok.command_index}: subpath degenerates to a single point"
            )
        paths.append(path_from_pairs(deduped, closed=closed))
        points = []
        have_subpath = False

    first = tok.peek_command()
    if first is None:
        raise SvgPathError("empty path data")
    if first not in ("M", "m"):
        raise SvgPathError("command 0: path data must start with a moveto (M or m)")

    while not tok.at_end():
        cmd_char = tok.peek_command()
        if cmd_char == "":
            raise SvgPathError(
                f"command {tok.command_index}: unexpected character "
                f"{tok.text[tok.pos]!r} where a command was expected"
            )
        cmd = tok.take_command()
        upper = cmd.upper()
        relative = cmd.islower()

        if upper in ("S", "T"):
            raise SvgPathError(
                f"command {tok.command_index}: shorthand curve command "
                f"{cmd!r} is not supported; use explicit C or Q"
            )

        if upper == "Z":
            finish_subpath(closed=True)
            cur = subpath_start
            continue

        if upper == "M":
            finish_subpath(closed=False)
            first_pair = True
            while first_pair or tok.more_arguments():
                x = tok.take_number("x coordinate")
                y = tok.take_number("y coordinate")
                if relative:
                    x += cur[0]
                    y += cur[1]
                if first_pair:
                    cur = (x, y)
                    subpath_start = cur
                    points = [cur]
                    have_subpath = True
                    first_pair = False
                else:
                    # Extra coordinate pairs after a moveto are implicit linetos.
                    cur = (x, y)
                    points.append(cur)
            continue

        if not have_subpath:
            raise SvgPathError(
                f"command {tok.command_index}: {cmd!r} before any moveto"
            )

        if upper == "L":
            first_args = True
            while first_args or tok.more_arguments():
                first_args = False
                x = tok.take_number("x coordinate")
                y = tok.take_number("y coordinate")
                if relative:
                    x += cur[0]
                    y += cur[1]
                cur = (x, y)
                points.append(cur)
        elif upper == "H":
            first_args = True
            while first_args or tok.more_arguments():
                first_args = False
                x = tok.take_number("x coordinate")
                if relative:
                    x += cur[0]
                cur = (x, cur[1])
                points.append(cur)
        elif upper == "V":
            first_args = True
            while first_args or tok.more_arguments():
                first_args = False
                y = tok.take_number("y coordinate")
                if relative:
                    y += cur[1]
                cur = (cur[0], y)
                points.append(cur)
        elif upper == "C":
            first_args = True
            while first_args or tok.more_arguments():
                first_args = False
                vals = [tok.take_number(f"cubic argument {i + 1}") for i in range(6)]
                if relative:
                    vals = [
                        vals[0] + cur[0], vals[1] + cur[1],
                        vals[2] + cur[0], vals[3] + cur[1],
                        vals[4] + cur[0], vals[5] + cur[1],
                    ]
                p1 = (vals[0], vals[1])
                p2 = (vals[2], vals[3])
                p3 = (vals[4], vals[5])
                _flatten_cubic(cur, p1, p2, p3, chord_tolerance, points)
                cur = p3
        elif upper == "Q":
            first_args = True
            while first_args or tok.more_arguments():
                first_args = False
                vals = [tok.take_number(f"quadratic argument {i + 1}") for i in range(4)]
                if relative:
                    vals = [
                        vals[0] + cur[0], vals[1] + cur[1],
                        vals[2] + cur[0], vals[3] + cur[1],
                    ]
                p1 = (vals[0], vals[1])
                p2 = (vals[2], vals[3])
                _flatten_quadratic(cur, p1, p2, chord_tolerance, points)
                cur = p2
        elif upper == "A":
            first_args = True
            while first_args or tok.more_arguments():
                first_args = False
                rx = tok.take_number("arc rx")
                ry = tok.take_number("arc ry")
                rot = tok.take_number("arc x-axis rotation")
                large = tok.take_flag("large-arc")
                sweep = tok.take_flag("sweep")
                x = tok.take_number("arc end x")
                y = tok.take_number("arc end y")
                if relative:
                    x += cur[0]
                    y += cur[1]
                end = (x, y)
                _flatten_arc(cur, rx, ry, rot, large, sweep, end, chord_tolerance, points)
                cur = end
        else:
            raise SvgPathError(
                f"command {tok.command_index}: unsupported command {cmd!r}"
            )

    finish_subpath(closed=False)
    if not paths:
        raise SvgPathError("path data produced no usable subpaths")
    return paths


@dataclass(frozen=True)
class SvgLoadResult:
    paths: tuple[PlanarPath, ...]
    warnings: tuple[str, ...] = field(default=())


_TRANSFORM_RE = re.compile(r"(\w+)\s*\(([^)]*)\)")


def _parse_transform(text: str):
    """Parse a transform list of translate(...) and scale(...) only.

    Returns (sx, sy, tx, ty) such that x' = sx*x + tx, y' = sy*y + ty.
    Other transform functions raise :class:`SvgPathError` -- rotated or
    skewed patterns must be baked into the path data before loading.
    """
    sx, sy, tx, ty = 1.0, 1.0, 0.0, 0.0
    for m in _TRANSFORM_RE.finditer(text):
        name = m.group(1)
        args = [float(v) for v in _NUMBER_RE.findall(m.group(2))]
        if name == "translate":
            if len(args) not in (1, 2):
                raise SvgPathError(f"translate expects 1 or 2 numbers, got {len(args)}")
            dx = args[0]
            dy = args[1] if len(args) == 2 else 0.0
            tx += sx * dx
            ty += sy * dy
        elif name == "scale":
            if len(args) not in (1, 2):
                raise SvgPathError(f"scale expects 1 or 2 numbers, got {len(args)}")
            fx = args[0]
            fy = args[1] if len(args) == 2 else args[0]
            sx *= fx
            sy *= fy
        else:
            raise SvgPathError(
                f"unsupported transform {name!r}; only translate and scale are handled"
            )
    return sx, sy, tx, ty


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def load_svg_paths(
    svg_text: str, chord_tolerance: float = DEFAULT_CHORD_TOLERANCE
) -> SvgLoadResult:
    """Extract flattened paths from an SVG document string.

    Only ``<path>`` elements are converted; other drawables produce a
    warning naming the element.  ``translate`` and ``scale`` transforms on
    paths and groups are applied; any other transform raises.
    """
    try:
        root = ET.fromstring(svg_text)
    except ET.ParseError as exc:
        raise SvgPathError(f"not well-formed XML: {exc}") from exc

    paths: list[PlanarPath] = []
    warnings: list[str] = []
    drawable = {"rect", "circle", "ellipse", "line", "polyline", "polygon", "text"}

    def walk(elem, sx, sy, tx, ty):
        name = _local_name(elem.tag)
        t = elem.get("transform")
        if t:
            lsx, lsy, ltx, lty = _parse_transform(t)
            # Compose parent o local: first apply local, then parent.
            tx, ty = sx * ltx + tx, sy * lty + ty
            sx, sy = sx * lsx, sy * lsy
        if name == "path":
            d = elem.get("d", "")
            for p in parse_path_data(d, chord_tolerance):
                verts = [(sx * v.x + tx, sy * v.y + ty) for v in p.vertices]
                paths.append(path_from_pairs(verts, closed=p.closed))
            return
        if name in drawable:
            warnings.append(
                f"skipped <{name}> element: only <path> data is converted"
            )
            return
        for child in elem:
            walk(child, sx, sy, tx, ty)

    walk(root, 1.0, 1.0, 0.0, 0.0)
    if not paths:
        raise SvgPathError("document contains no <path> elements")
    return SvgLoadResult(tuple(paths), tuple(warnings))


def load_svg_file(
    filename: str, chord_tolerance: float = DEFAULT_CHORD_TOLERANCE
) -> SvgLoadResult:
    with open(filename, "r", encoding="utf-8") as fh:
        return load_svg_paths(fh.read(), chord_tolerance)
