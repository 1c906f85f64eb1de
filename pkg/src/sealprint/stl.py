"""Binary STL reading and writing plus small mesh utilities.

Binary STL layout: an 80-byte header (which must not begin with "solid",
or readers would mistake the file for ASCII STL), a little-endian uint32
triangle count, then 50 bytes per triangle: twelve float32 values (normal,
three vertices) and a two-byte attribute field written as zero.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TriangleMesh", "StlError", "compute_normals",
    "write_binary_stl", "read_binary_stl", "is_watertight", "combine",
]

_HEADER_SIZE = 80
_RECORD_SIZE = 50
_COUNT_SIZE = 4


class StlError(ValueError):
    """Raised for files that are not valid binary STL."""


@dataclass(frozen=True)
class TriangleMesh:
    """Triangle soup: vertices shaped (n, 3, 3) -- n triangles, 3 corners,
    xyz each."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 3 or v.shape[1:] != (3, 3):
            raise ValueError(f"vertices must have shape (n, 3, 3), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("mesh contains non-finite coordinates")
        object.__setattr__(self, "vertices", v)

    @property
    def triangle_count(self) -> int:
        return int(self.vertices.shape[0])

    def translated(self, dx: float, dy: float, dz: float) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.array([dx, dy, dz]))

    def bounds(self) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        lo = self.vertices.min(axis=(0, 1))
        hi = self.vertices.max(axis=(0, 1))
        return (tuple(float(v) for v in lo), tuple(float(v) for v in hi))


def combine(meshes) -> TriangleMesh:
    meshes = list(meshes)
    if not meshes:
        raise ValueError("combine needs at least one mesh")
    return TriangleMesh(np.concatenate([m.vertices for m in meshes], axis=0))


def compute_normals(vertices: np.ndarray) -> np.ndarray:
    """Unit normals from vertex winding (right-hand rule); degenerate
    triangles get a zero normal."""
    a = vertices[:, 1] - vertices[:, 0]
    b = vertices[:, 2] - vertices[:, 0]
    n = np.cross(a, b)
    lengths = np.linalg.norm(n, axis=1)
    safe = np.where(lengths > 1e-12, lengths, 1.0)
    n = n / safe[:, None]
    n[lengths <= 1e-12] = 0.0
    return n


def write_binary_stl(mesh: TriangleMesh, path: str, note: str = "") -> None:
    """Write a mesh as binary STL; ``note`` goes into the 80-byte header."""
    header_text = ("binary stl " + note).encode("ascii", "replace")[:_HEADER_SIZE]
    header = header_text.ljust(_HEADER_SIZE, b"\0")
    normals = compute_normals(mesh.vertices)
    n = mesh.triangle_count
    records = np.zeros(n, dtype=_record_dtype())
    records["normal"] = normals.astype(np.float32)
    records["vertices"] = mesh.vertices.astype(np.float32)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack("<I", n))
        fh.write(records.tobytes())


def _record_dtype():
    return np.dtype(
        [
            ("normal", "<f4", (3,)),
            ("vertices", "<f4", (3, 3)),
            ("attrs", "<u2"),
        ]
    )


def read_binary_stl(path: str) -> TriangleMesh:
    """Read a binary STL file, validating its size against the record count."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER_SIZE + _COUNT_SIZE:
        raise StlError(f"{path}: too short to be a binary STL file")
    if data[:5] == b"solid":
        # Could still be binary with an unfortunate header, but every file
        # this tool writes avoids the prefix; treat it as ASCII and refuse.
        raise StlError(
            f"{path}: starts with 'solid' (ASCII STL?); only binary STL is supported"
        )
    (count,) = struct.unpack_from("<I", data, _HEADER_SIZE)
    expected = _HEADER_SIZE + _COUNT_SIZE + count * _RECORD_SIZE
    if len(data) != expected:
        raise StlError(
            f"{path}: size mismatch: {count} triangles need {expected} bytes,"
            f" file has {len(data)}"
        )
    records = np.frombuffer(
        data, dtype=_record_dtype(), count=count, offset=_HEADER_SIZE + _COUNT_SIZE
    )
    return TriangleMesh(records["vertices"].astype(np.float64))


def is_watertight(mesh: TriangleMesh) -> bool:
    """True when the mesh is a closed, consistently oriented surface.

    Every directed edge must appear exactly once, matched by its reverse.
    Coordinates are compared after rounding to 1e-9 to tolerate float noise.
    """
    edges: dict[tuple, int] = {}
    for tri in np.round(mesh.vertices, 9):
        pts = [tuple(v) for v in tri]
        if len(set(pts)) < 3:
            return False  # degenerate triangle
        for i in range(3):
            edge = (pts[i], pts[(i + 1) % 3])
            edges[edge] = edges.get(edge, 0) + 1
    for (a, b), count in edges.items():
        if count != 1 or edges.get((b, a), 0) != 1:
            return False
    return True
