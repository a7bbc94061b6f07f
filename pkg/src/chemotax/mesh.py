"""Conforming triangular meshes of a disk.

The generator places vertices on concentric rings (ring ``j`` at radius
``j * R / n_rings`` carrying ``6 j`` vertices) and zips neighbouring rings
together.  Meshes are immutable once built.
"""
from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "MeshError",
    "TriMesh",
    "generate_disk_mesh",
    "mesh_area",
    "signed_areas",
    "unique_edges",
    "boundary_edges",
    "save_mesh",
    "load_mesh",
]


class MeshError(ValueError):
    """Raised for malformed mesh data or mesh files."""


def signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed area of each triangle (positive for counter-clockwise)."""
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    e1 = p1 - p0
    e2 = p2 - p0
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _edge_counts(triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    edges = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    )
    edges.sort(axis=1)
    return np.unique(edges, axis=0, return_counts=True)


def unique_edges(triangles: np.ndarray) -> np.ndarray:
    """Distinct undirected edges as sorted index pairs."""
    return _edge_counts(np.asarray(triangles))[0]


def boundary_edges(triangles: np.ndarray) -> np.ndarray:
    """Edges with exactly one incident triangle."""
    edges, counts = _edge_counts(np.asarray(triangles))
    return edges[counts == 1]


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangulation with per-vertex boundary flags.

    Parameters
    ----------
    vertices : (n_v, 2) float array
    triangles : (n_t, 3) int array of 0-based vertex indices, counter-clockwise
    boundary : (n_v,) bool array, True on boundary vertices

    The constructor validates every invariant and freezes the arrays.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    uid: str = field(init=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        t = np.array(self.triangles, dtype=np.int64)
        b = np.array(self.boundary, dtype=bool)
        _validate(v, t, b)
        for arr in (v, t, b):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "boundary", b)
        h = hashlib.sha1()
        for arr in (v, t, b):
            h.update(arr.tobytes())
        object.__setattr__(self, "uid", h.hexdigest()[:16])

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def areas(self) -> np.ndarray:
        return signed_areas(self.vertices, self.triangles)

    def __eq__(self, other):
        if not isinstance(other, TriMesh):
            return NotImplemented
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
            and np.array_equal(self.boundary, other.boundary)
        )

    def __hash__(self):
        return hash(self.uid)

    def __repr__(self):
        return f"TriMesh(n_vertices={self.n_vertices}, n_triangles={self.n_triangles})"


def _validate(v: np.ndarray, t: np.ndarray, b: np.ndarray) -> None:
    if v.ndim != 2 or v.shape[1] != 2:
        raise MeshError(f"vertices must have shape (n, 2), got {v.shape}")
    if t.ndim != 2 or t.shape[1] != 3:
        raise MeshError(f"triangles must have shape (n, 3), got {t.shape}")
    if b.shape != (v.shape[0],):
        raise MeshError("boundary flags must have one entry per vertex")
    if t.shape[0] == 0:
        raise MeshError("mesh has no triangles")
    if not np.all(np.isfinite(v)):
        raise MeshError("non-finite vertex coordinate")
    n_v = v.shape[0]
    bad = np.flatnonzero(((t < 0) | (t >= n_v)).any(axis=1))
    if bad.size:
        raise MeshError(f"triangle {bad[0]} has a vertex index outside [0, {n_v})")
    bad = np.flatnonzero(
        (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])
    )
    if bad.size:
        raise MeshError(f"triangle {bad[0]} repeats a vertex index")
    areas = signed_areas(v, t)
    bad = np.flatnonzero(areas <= 0.0)
    if bad.size:
        raise MeshError(f"triangle {bad[0]} is not positively oriented")
    edges, counts = _edge_counts(t)
    if np.any(counts > 2):
        e = edges[np.argmax(counts > 2)]
        raise MeshError(f"edge ({e[0]}, {e[1]}) is shared by more than two triangles")
    bnd = edges[counts == 1]
    if not np.all(b[bnd]):
        raise MeshError("boundary edge endpoint is not flagged as boundary")


def _zip_rings(inner: np.ndarray, outer: np.ndarray) -> list[tuple[int, int, int]]:
    # both rings start at angle 0 with uniform spacing
    na, nb = inner.size, outer.size
    if na == 1:
        return [(inner[0], outer[j], outer[(j + 1) % nb]) for j in range(nb)]
    tris = []
    i = j = 0
    while i < na or j < nb:
        # compare fractional angles of the next candidates exactly via integers
        if j < nb and (i == na or (j + 1) * na <= (i + 1) * nb):
            tris.append((inner[i % na], outer[j], outer[(j + 1) % nb]))
            j += 1
        else:
            tris.append((inner[i], outer[j % nb], inner[(i + 1) % na]))
            i += 1
    return tris


def generate_disk_mesh(radius: float = 9.0, n_rings: int = 40) -> TriMesh:
    """Structured ring mesh of the disk of the given radius.

    Examples
    --------
    >>> m = generate_disk_mesh(9.0, 1)
    >>> m.n_vertices, m.n_triangles
    (7, 6)
    """
    if not (radius > 0 and math.isfinite(radius)):
        raise ValueError(f"radius must be positive, got {radius}")
    if int(n_rings) != n_rings or n_rings < 1:
        raise ValueError(f"n_rings must be a positive integer, got {n_rings}")
    n_rings = int(n_rings)

    coords = [(0.0, 0.0)]
    rings = [np.array([0])]
    for j in range(1, n_rings + 1):
        r = radius * j / n_rings
        count = 6 * j
        ang = 2.0 * np.pi * np.arange(count) / count
        start = len(coords)
        coords.extend(zip(r * np.cos(ang), r * np.sin(ang)))
        rings.append(np.arange(start, start + count))

    tris = []
    for a, b in zip(rings[:-1], rings[1:]):
        tris.extend(_zip_rings(a, b))

    vertices = np.array(coords)
    boundary = np.zeros(len(coords), dtype=bool)
    boundary[rings[-1]] = True
    return TriMesh(vertices, np.array(tris, dtype=np.int64), boundary)


def mesh_area(mesh: TriMesh) -> float:
    """Total area of the triangulation."""
    return float(np.sum(mesh.areas))


def save_mesh(mesh: TriMesh, path) -> None:
    """Write ``mesh`` in the plain-text format (coordinates as hex floats)."""
    lines = [
        "# chemotax mesh: n_v n_t / x y boundary / i j k",
        f"{mesh.n_vertices} {mesh.n_triangles}",
    ]
    for (x, y), b in zip(mesh.vertices, mesh.boundary):
        lines.append(f"{float(x).hex()} {float(y).hex()} {int(b)}")
    for i, j, k in mesh.triangles:
        lines.append(f"{i} {j} {k}")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_float(tok: str) -> float:
    try:
        return float(tok)
    except ValueError:
        return float.fromhex(tok)


def load_mesh(path, strict: bool = False) -> TriMesh:
    """Read a mesh file written by :func:`save_mesh` or by hand.

    Negatively oriented triangles are silently flipped unless ``strict``.
    """
    records = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            records.append((lineno, text.split()))
    if not records:
        raise MeshError(f"{path}: empty mesh file")

    lineno, head = records[0]
    try:
        n_v, n_t = (int(x) for x in head)
    except ValueError:
        raise MeshError(f"line {lineno}: expected 'n_v n_t', got {' '.join(head)!r}")
    if len(records) != 1 + n_v + n_t:
        raise MeshError(
            f"{path}: expected {n_v} vertex and {n_t} triangle lines, "
            f"found {len(records) - 1} data lines"
        )

    vertices = np.empty((n_v, 2))
    boundary = np.empty(n_v, dtype=bool)
    for idx, (lineno, tok) in enumerate(records[1 : 1 + n_v]):
        if len(tok) != 3 or tok[2] not in ("0", "1"):
            raise MeshError(f"line {lineno}: expected 'x y b' with b in {{0,1}}")
        try:
            vertices[idx] = _parse_float(tok[0]), _parse_float(tok[1])
        except ValueError:
            raise MeshError(f"line {lineno}: unparseable coordinate")
        boundary[idx] = tok[2] == "1"

    triangles = np.empty((n_t, 3), dtype=np.int64)
    for idx, (lineno, tok) in enumerate(records[1 + n_v :]):
        try:
            if len(tok) != 3:
                raise ValueError
            triangles[idx] = [int(x) for x in tok]
        except ValueError:
            raise MeshError(f"line {lineno}: expected three integer vertex indices")
        if np.any(triangles[idx] < 0) or np.any(triangles[idx] >= n_v):
            raise MeshError(
                f"line {lineno}: triangle {idx} has a vertex index outside [0, {n_v})"
            )

    areas = signed_areas(vertices, triangles)
    neg = np.flatnonzero(areas < 0)
    if neg.size:
        if strict:
            raise MeshError(f"triangle {neg[0]} is negatively oriented")
        logger.debug("reorienting %d triangles from %s", neg.size, path)
        triangles[neg] = triangles[neg][:, [0, 2, 1]]
    return TriMesh(vertices, triangles, boundary)
