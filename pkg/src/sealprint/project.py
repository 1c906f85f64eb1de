"""Project documents: everything one job needs, in a single YAML file.

A project names the printable region, the material stack, the seal pattern
files, the part meshes, and the alignment marker.  Paths inside the document
are resolved relative to the document's own directory, so a project folder
can be moved or shared as a unit.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from sealprint.geometry import PlanarPath, Point2, PrintRegion, path_from_pairs
from sealprint.materials import Profile, default_profile, load_profile
from sealprint.merger import AlignmentMarker
from sealprint.svgpath import SvgPathError, load_svg_file
from sealprint.stl import StlError, TriangleMesh, read_binary_stl

__all__ = [
    "ProjectError", "Project", "load_project", "save_project",
    "project_from_dict", "project_to_dict", "atomic_write_text",
    "atomic_write_bytes", "validate_project",
]

DEFAULT_OUTPUTS = {
    "seal": "seal.gcode",
    "export": "parts_with_marker.stl",
    "merged": "hybrid.gcode",
}


class ProjectError(ValueError):
    """Raised when a project document is malformed."""


@dataclass(frozen=True)
class Project:
    root: Path
    region: PrintRegion
    stack_name: str
    patterns: tuple[Path, ...]
    parts: tuple[Path, ...] = ()
    marker: AlignmentMarker = field(default_factory=AlignmentMarker)
    profile_path: Path | None = None
    svg_scale: float = 1.0
    chord_tolerance: float = 0.05
    outputs: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_OUTPUTS))
    version: int = 0

    def load_profile(self) -> Profile:
        if self.profile_path is None:
            return default_profile()
        return load_profile(str(self.profile_path))

    def output_path(self, kind: str) -> Path:
        name = self.outputs.get(kind, DEFAULT_OUTPUTS[kind])
        return self.root / name

    def load_pattern_paths(self) -> tuple[list[PlanarPath], list[str]]:
        """Load and flatten every pattern file; returns (paths, warnings)."""
        paths: list[PlanarPath] = []
        warnings: list[str] = []
        for pattern in self.patterns:
            try:
                result = load_svg_file(str(pattern), self.chord_tolerance)
            except OSError as exc:
                raise ProjectError(f"cannot read pattern {pattern}: {exc}") from exc
            except SvgPathError as exc:
                raise ProjectError(f"pattern {pattern}: {exc}") from exc
            warnings.extend(f"{pattern.name}: {w}" for w in result.warnings)
            for p in result.paths:
                if self.svg_scale != 1.0:
                    p = path_from_pairs(
                        [(v.x * self.svg_scale, v.y * self.svg_scale) for v in p.vertices],
                        closed=p.closed,
                    )
                paths.append(p)
        return paths, warnings

    def load_part_meshes(self) -> list[TriangleMesh]:
        meshes: list[TriangleMesh] = []
        for part in self.parts:
            try:
                meshes.append(read_binary_stl(str(part)))
            except OSError as exc:
                raise ProjectError(f"cannot read part {part}: {exc}") from exc
            except StlError as exc:
                raise ProjectError(str(exc)) from exc
        return meshes


def _num(doc, key, path, default=None):
    if key not in doc:
        if default is not None:
            return default
        raise ProjectError(f"{path}.{key}: missing")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ProjectError(f"{path}.{key}: expected a number")
    return float(v)


def _point(doc, key, path, default):
    v = doc.get(key, default)
    if (
        not isinstance(v, (list, tuple))
        or len(v) != 2
        or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)
    ):
        raise ProjectError(f"{path}.{key}: expected [x, y]")
    return Point2(float(v[0]), float(v[1]))


def project_from_dict(doc: dict, root: Path) -> Project:
    if not isinstance(doc, dict):
        raise ProjectError("project document must be a mapping")
    known = {
        "region", "stack", "patterns", "parts", "marker", "profile",
        "svg_scale", "chord_tolerance", "outputs", "version",
    }
    unknown = set(doc) - known
    if unknown:
        raise ProjectError(f"unknown project key(s): {', '.join(sorted(unknown))}")

    region_doc = doc.get("region")
    if not isinstance(region_doc, dict):
        raise ProjectError("region: missing or not a mapping")
    try:
        region = PrintRegion(
            width=_num(region_doc, "width", "region"),
            depth=_num(region_doc, "depth", "region"),
            origin=_point(region_doc, "origin", "region", [0.0, 0.0]),
        )
    except ValueError as exc:
        raise ProjectError(f"region: {exc}") from exc

    stack = doc.get("stack")
    if not isinstance(stack, str) or not stack:
        raise ProjectError("stack: missing or not a string")

    patterns_doc = doc.get("patterns")
    if not isinstance(patterns_doc, list) or not patterns_doc:
        raise ProjectError("patterns: at least one pattern file is required")
    if not all(isinstance(p, str) and p for p in patterns_doc):
        raise ProjectError("patterns: every entry must be a file name")

    parts_doc = doc.get("parts", [])
    if not isinstance(parts_doc, list) or not all(
        isinstance(p, str) and p for p in parts_doc
    ):
        raise ProjectError("parts: every entry must be a file name")

    marker_doc = doc.get("marker", {})
    if not isinstance(marker_doc, dict):
        raise ProjectError("marker: expected a mapping")
    default_center = [region.origin.x + 5.0, region.origin.y + 5.0]
    try:
        marker = AlignmentMarker(
            center=_point(marker_doc, "center", "marker", default_center),
            arm_length=_num(marker_doc, "arm_length", "marker", 10.0),
            arm_width=_num(marker_doc, "arm_width", "marker", 1.2),
            height=_num(marker_doc, "height", "marker", 0.2),
        )
    except ValueError as exc:
        raise ProjectError(f"marker: {exc}") from exc

    profile_doc = doc.get("profile")
    if profile_doc is not None and not isinstance(profile_doc, str):
        raise ProjectError("profile: expected a file name or null")

    outputs = dict(DEFAULT_OUTPUTS)
    outputs_doc = doc.get("outputs", {})
    if not isinstance(outputs_doc, dict):
        raise ProjectError("outputs: expected a mapping")
    for key, value in outputs_doc.items():
        if key not in DEFAULT_OUTPUTS:
            raise ProjectError(
                f"outputs.{key}: unknown output (expected one of"
                f" {', '.join(DEFAULT_OUTPUTS)})"
            )
        if not isinstance(value, str) or not value:
            raise ProjectError(f"outputs.{key}: expected a file name")
        outputs[key] = value

    version = doc.get("version", 0)
    if isinstance(version, bool) or not isinstance(version, int) or version < 0:
        raise ProjectError("version: expected a non-negative integer")

    svg_scale = _num(doc, "svg_scale", "project", 1.0)
    if svg_scale <= 0:
        raise ProjectError("svg_scale: must be positive")
    chord_tolerance = _num(doc, "chord_tolerance", "project", 0.05)
    if chord_tolerance <= 0:
        raise ProjectError("chord_tolerance: must be positive")

    return Project(
        root=root,
        region=region,
        stack_name=stack,
        patterns=tuple(root / p for p in patterns_doc),
        parts=tuple(root / p for p in parts_doc),
        marker=marker,
        profile_path=None if profile_doc is None else root / profile_doc,
        svg_scale=svg_scale,
        chord_tolerance=chord_tolerance,
        outputs=outputs,
        version=version,
    )


def project_to_dict(project: Project) -> dict:
    def rel(p: Path) -> str:
        try:
            return str(p.relative_to(project.root))
        except ValueError:
            return str(p)

    doc: dict = {
        "version": project.version,
        "region": {
            "width": project.region.width,
            "depth": project.region.depth,
            "origin": [project.region.origin.x, project.region.origin.y],
        },
        "stack": project.stack_name,
        "patterns": [rel(p) for p in project.patterns],
        "parts": [rel(p) for p in project.parts],
        "marker": {
            "center": [project.marker.center.x, project.marker.center.y],
            "arm_length": project.marker.arm_length,
            "arm_width": project.marker.arm_width,
            "height": project.marker.height,
        },
        "svg_scale": project.svg_scale,
        "chord_tolerance": project.chord_tolerance,
        "outputs": dict(project.outputs),
    }
    if project.profile_path is not None:
        doc["profile"] = rel(project.profile_path)
    return doc


def load_project(path: str) -> Project:
    p = Path(path)
    try:
        with open(p, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ProjectError(f"cannot read project file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ProjectError(f"{path}: invalid YAML: {exc}") from exc
    if doc is None:
        raise ProjectError(f"{path}: project file is empty")
    return project_from_dict(doc, p.parent.resolve())


def save_project(project: Project, path: str) -> None:
    text = yaml.safe_dump(project_to_dict(project), sort_keys=False)
    atomic_write_text(path, text)


def atomic_write_text(path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a
    half-written file."""
    atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def validate_project(project: Project) -> list[str]:
    """Every problem that would stop this project from running, as text.

    Checks: referenced files exist and parse, the stack exists in the
    profile, pattern geometry stays inside the region, and the marker fits
    the region too.
    """
    problems: list[str] = []

    profile = None
    if project.profile_path is not None and not project.profile_path.is_file():
        problems.append(f"profile file not found: {project.profile_path}")
    else:
        try:
            profile = project.load_profile()
        except ValueError as exc:
            problems.append(f"profile: {exc}")
    if profile is not None and project.stack_name not in profile.stacks:
        known = ", ".join(sorted(profile.stacks)) or "(none)"
        problems.append(
            f"stack {project.stack_name!r} not defined by the profile"
            f" (known: {known})"
        )

    for pattern in project.patterns:
        if not pattern.is_file():
            problems.append(f"pattern file not found: {pattern}")
    for part in project.parts:
        if not part.is_file():
            problems.append(f"part file not found: {part}")
    if problems:
        return problems  # parsing checks below need the files present

    try:
        paths, _ = project.load_pattern_paths()
    except ProjectError as exc:
        problems.append(str(exc))
        paths = []

    from sealprint.geometry import check_within_region

    if paths:
        report = check_within_region(paths, project.region)
        if not report.ok:
            problems.append(
                "pattern geometry leaves the region:\n" + report.describe()
            )

    half = project.marker.arm_length / 2.0
    c = project.marker.center
    r = project.region
    if not (
        r.origin.x <= c.x - half
        and c.x + half <= r.origin.x + r.width
        and r.origin.y <= c.y - half
        and c.y + half <= r.origin.y + r.depth
    ):
        problems.append(
            f"marker at ({c.x:g}, {c.y:g}) with arm length"
            f" {project.marker.arm_length:g} does not fit the region"
        )

    try:
        project.load_part_meshes()
    except ProjectError as exc:
        problems.append(str(exc))

    return problems
