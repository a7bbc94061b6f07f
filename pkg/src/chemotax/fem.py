"""P1 finite-element operators on a :class:`~chemotax.mesh.TriMesh`.

All element integrals use the closed-form P1 formulas, so the assembled
matrices are exact for piecewise-linear data.  The three operators share a
single CSR sparsity pattern, which lets the time stepper combine them by
adding ``.data`` arrays.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from .mesh import TriMesh

__all__ = [
    "Field",
    "P1Space",
    "assemble_mass",
    "assemble_stiffness",
    "assemble_convection",
    "interpolate",
    "integrate",
    "f_production",
    "g_production",
    "apply_production",
    "save_field_csv",
    "load_field_csv",
]

_MASS_BLOCK = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values of a P1 function, tagged with the owning mesh's uid."""

    values: np.ndarray
    mesh_id: str

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValueError("field values must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains NaN or Inf")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def on(cls, mesh: TriMesh, values) -> "Field":
        vals = np.asarray(values, dtype=np.float64)
        if vals.shape != (mesh.n_vertices,):
            raise ValueError(
                f"field length {vals.shape} does not match {mesh.n_vertices} vertices"
            )
        return cls(vals, mesh.uid)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.size


FieldLike = Union[Field, np.ndarray]


def _values(mesh: TriMesh, field: FieldLike) -> np.ndarray:
    if isinstance(field, Field):
        if field.mesh_id != mesh.uid:
            raise ValueError("field belongs to a different mesh")
        return field.values
    vals = np.asarray(field, dtype=np.float64)
    if vals.shape != (mesh.n_vertices,):
        raise ValueError(
            f"field length {vals.shape} does not match {mesh.n_vertices} vertices"
        )
    return vals


class P1Space:
    """Geometry and sparsity data for fast repeated assembly on one mesh.

    Parameters
    ----------
    mesh : TriMesh
    """

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        tri = mesh.triangles
        p = mesh.vertices
        area = mesh.areas
        if np.any(area < 1e-14 * area.mean()):
            bad = int(np.argmax(area < 1e-14 * area.mean()))
            raise ValueError(f"degenerate triangle {bad} (area {area[bad]:.3e})")
        self.area = area

        x, y = p[tri, 0], p[tri, 1]
        b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
        c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
        # (n_t, 3, 2): gradient of each local hat function
        self.grad = np.stack([b, c], axis=2) / (2.0 * area)[:, None, None]

        n = mesh.n_vertices
        rows = np.repeat(tri, 3, axis=1).ravel()
        cols = np.tile(tri, (1, 3)).ravel()
        keys, self._slot = np.unique(rows * n + cols, return_inverse=True)
        self._slot = self._slot.ravel()
        self.nnz = keys.size
        self.indices = (keys % n).astype(np.int32)
        counts = np.bincount(keys // n, minlength=n)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        self.n = n

    def _scatter(self, local: np.ndarray) -> np.ndarray:
        return np.bincount(self._slot, weights=local.ravel(), minlength=self.nnz)

    def csr(self, data: np.ndarray) -> sp.csr_matrix:
        """Wrap ``data`` laid out on the shared pattern as a CSR matrix."""
        return sp.csr_matrix(
            (data, self.indices.copy(), self.indptr.copy()), shape=(self.n, self.n)
        )

    @cached_property
    def M(self) -> sp.csr_matrix:
        """Consistent mass matrix (cached)."""
        return self.csr(self.mass_data())

    @cached_property
    def K(self) -> sp.csr_matrix:
        """Stiffness matrix (cached)."""
        return self.csr(self.stiffness_data())

    def mass_data(self) -> np.ndarray:
        return self._scatter(self.area[:, None, None] * _MASS_BLOCK)

    def lumped_mass_diagonal(self) -> np.ndarray:
        return np.bincount(
            self.mesh.triangles.ravel(),
            weights=np.repeat(self.area / 3.0, 3),
            minlength=self.n,
        )

    def stiffness_data(self) -> np.ndarray:
        local = np.einsum("tid,tjd->tij", self.grad, self.grad) * self.area[:, None, None]
        return self._scatter(local)

    def convection_data(self, potential: np.ndarray) -> np.ndarray:
        # row i, any column j: (area/3) * grad(Phi) . grad(phi_i)
        tri = self.mesh.triangles
        gphi = np.einsum("ti,tid->td", potential[tri], self.grad)
        row = np.einsum("td,tid->ti", gphi, self.grad) * (self.area / 3.0)[:, None]
        local = np.repeat(row[:, :, None], 3, axis=2)
        return self._scatter(local)


def assemble_mass(mesh: TriMesh, lumped: bool = False) -> sp.csr_matrix:
    """Consistent (default) or row-sum lumped P1 mass matrix."""
    space = P1Space(mesh)
    if lumped:
        d = space.lumped_mass_diagonal()
        return sp.diags(d, format="csr")
    return space.csr(space.mass_data())


def assemble_stiffness(mesh: TriMesh) -> sp.csr_matrix:
    """P1 stiffness matrix with natural (zero-flux) boundary conditions."""
    space = P1Space(mesh)
    return space.csr(space.stiffness_data())


def assemble_convection(mesh: TriMesh, potential: FieldLike) -> sp.csr_matrix:
    """Chemotactic transport matrix ``C[i, j] = int phi_j grad(Phi) . grad(phi_i)``.

    Columns sum to zero, so ``1^T C = 0`` and transport conserves mass.
    """
    phi = _values(mesh, potential)
    space = P1Space(mesh)
    return space.csr(space.convection_data(phi))


def interpolate(mesh: TriMesh, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> Field:
    """Nodal interpolant of ``func(x1, x2)`` (vectorised over vertices)."""
    x1, x2 = mesh.vertices[:, 0], mesh.vertices[:, 1]
    vals = np.broadcast_to(np.asarray(func(x1, x2), dtype=np.float64), x1.shape)
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmax(~np.isfinite(vals)))
        raise ValueError(f"function is not finite at vertex {bad}")
    return Field.on(mesh, vals.copy())


def integrate(mesh: TriMesh, field: FieldLike) -> float:
    """Exact integral of the P1 interpolant of ``field``."""
    vals = _values(mesh, field)
    return float(np.dot(mesh.areas, vals[mesh.triangles].sum(axis=1)) / 3.0)


def f_production(s, alpha: float, k: float) -> np.ndarray:
    """Attractant production ``alpha * max(s, 0)**k``."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    return alpha * np.power(np.maximum(s, 0.0), k)


def g_production(s, gamma0: float, l: float) -> np.ndarray:
    """Repellent production ``gamma0 * (1 + max(s, 0))**l``."""
    if not l > 0:
        raise ValueError(f"l must be positive, got {l}")
    return gamma0 * np.power(1.0 + np.maximum(s, 0.0), l)


def apply_production(field: Field, law: str, params) -> Field:
    """Evaluate a production law nodally.

    ``law`` is ``"f_alpha_k"`` (uses ``params.alpha``, ``params.k``) or
    ``"g_gamma_l"`` (uses ``params.gamma0``, ``params.l``).  Negative nodal
    values are clamped to zero before evaluation.
    """
    if law == "f_alpha_k":
        out = f_production(field.values, params.alpha, params.k)
    elif law == "g_gamma_l":
        out = g_production(field.values, params.gamma0, params.l)
    else:
        raise ValueError(f"unknown production law {law!r}")
    return Field(out, field.mesh_id)


def save_field_csv(mesh: TriMesh, field: FieldLike, path) -> None:
    """Write ``index,x,y,value`` rows (round-trippable float repr)."""
    vals = _values(mesh, field)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "x", "y", "value"])
        for i, ((x, y), v) in enumerate(zip(mesh.vertices, vals)):
            w.writerow([i, repr(float(x)), repr(float(y)), repr(float(v))])


def load_field_csv(mesh: TriMesh, path) -> Field:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != mesh.n_vertices:
        raise ValueError(f"{path}: {len(rows)} rows for {mesh.n_vertices} vertices")
    vals = np.empty(len(rows))
    for r in rows:
        vals[int(r["index"])] = float(r["value"])
    return Field.on(mesh, vals)
