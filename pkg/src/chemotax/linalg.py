"""Jacobi-preconditioned Krylov solvers for the assembled FEM systems.

Matrices are ``scipy.sparse`` CSR; only ``A @ x`` and ``A.diagonal()`` are
used.  Convergence is always confirmed against a freshly recomputed
residual ``b - A x`` before a solve is reported as converged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SolveReport", "cg_solve", "bicgstab_solve", "zero_mean_solve"]


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one iterative solve.

    ``final_residual`` is ``||b - A x|| / ||b||`` recomputed at exit.
    """

    iterations: int
    final_residual: float
    converged: bool


def _jacobi(A) -> np.ndarray:
    d = np.asarray(A.diagonal(), dtype=np.float64)
    inv = np.ones_like(d)
    nz = d != 0.0
    inv[nz] = 1.0 / d[nz]
    return inv


def _setup(A, b, x0):
    b = np.asarray(b, dtype=np.float64)
    if A.shape != (b.size, b.size):
        raise ValueError(f"shape mismatch: A is {A.shape}, b has {b.size} entries")
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64)
    return b, x


def _relres(A, b, x, bnorm) -> float:
    return float(np.linalg.norm(b - A @ x) / bnorm)


def cg_solve(A, b, tol: float = 1e-10, max_iter: int | None = None, x0=None):
    """Preconditioned conjugate gradients for symmetric positive (semi)definite ``A``.

    Returns ``(x, SolveReport)``.  Breakdown or hitting ``max_iter`` yields a
    report with ``converged=False``; the caller decides what to do.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    b, x = _setup(A, b, x0)
    n = b.size
    max_iter = 10 * n if max_iter is None else max_iter
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), SolveReport(0, 0.0, True)
    dinv = _jacobi(A)

    r = b - A @ x
    it = 0
    while True:
        if np.linalg.norm(r) <= tol * bnorm:
            # confirm with a fresh residual; restart from it otherwise
            r = b - A @ x
            res = float(np.linalg.norm(r) / bnorm)
            if res <= tol:
                return x, SolveReport(it, res, True)
        z = dinv * r
        p = z.copy()
        rz = r @ z
        restart = False
        while it < max_iter:
            Ap = A @ p
            curv = p @ Ap
            if not curv > 0.0 or not np.isfinite(curv):
                return x, SolveReport(it, _relres(A, b, x, bnorm), False)
            step = rz / curv
            x += step * p
            r -= step * Ap
            it += 1
            if np.linalg.norm(r) <= tol * bnorm:
                restart = True
                break
            z = dinv * r
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        if not restart:
            res = _relres(A, b, x, bnorm)
            return x, SolveReport(it, res, res <= tol)


def bicgstab_solve(A, b, tol: float = 1e-8, max_iter: int | None = None, x0=None):
    """Right-preconditioned BiCGSTAB for general square ``A``.

    Returns ``(x, SolveReport)`` with the same conventions as :func:`cg_solve`.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    b, x = _setup(A, b, x0)
    n = b.size
    max_iter = 10 * n if max_iter is None else max_iter
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), SolveReport(0, 0.0, True)
    dinv = _jacobi(A)
    thresh = tol * bnorm

    def failed(it):
        return x, SolveReport(it, _relres(A, b, x, bnorm), False)

    it = 0
    r = b - A @ x
    while True:
        if np.linalg.norm(r) <= thresh:
            r = b - A @ x
            res = float(np.linalg.norm(r) / bnorm)
            if res <= tol:
                return x, SolveReport(it, res, True)
        rhat = r.copy()
        rho = alpha = omega = 1.0
        v = np.zeros_like(b)
        p = np.zeros_like(b)
        restart = False
        while it < max_iter:
            rho_new = rhat @ r
            if rho_new == 0.0 or not np.isfinite(rho_new):
                return failed(it)
            beta = (rho_new / rho) * (alpha / omega)
            rho = rho_new
            p = r + beta * (p - omega * v)
            y = dinv * p
            v = A @ y
            den = rhat @ v
            if den == 0.0 or not np.isfinite(den):
                return failed(it)
            alpha = rho / den
            x += alpha * y
            s = r - alpha * v
            it += 1
            if np.linalg.norm(s) <= thresh:
                r = s
                restart = True
                break
            z = dinv * s
            t = A @ z
            tt = t @ t
            if tt == 0.0 or not np.isfinite(tt):
                return failed(it)
            omega = (t @ s) / tt
            if omega == 0.0:
                return failed(it)
            x += omega * z
            r = s - omega * t
            if np.linalg.norm(r) <= thresh:
                restart = True
                break
        if not restart:
            res = _relres(A, b, x, bnorm)
            return x, SolveReport(it, res, res <= tol)


def zero_mean_solve(K, M, rhs, tol: float = 1e-10, max_iter: int | None = None, x0=None):
    """Solve the pure-Neumann problem ``K x = rhs`` in the zero-mean subspace.

    The source is first projected onto the range of ``K`` by removing its
    mean, ``rhs - (1^T rhs / 1^T M 1) M 1``, then the CG solution is shifted
    so that ``1^T M x = 0``.  The report refers to the projected system.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    m1 = np.asarray(M @ np.ones_like(rhs))
    area = m1.sum()
    proj = rhs - (rhs.sum() / area) * m1
    if np.linalg.norm(proj) <= 1e-13 * max(np.linalg.norm(rhs), np.finfo(float).tiny):
        return np.zeros_like(rhs), SolveReport(0, 0.0, True)
    x, rep = cg_solve(K, proj, tol=tol, max_iter=max_iter, x0=x0)
    x = x - (m1 @ x) / area
    return x, rep
