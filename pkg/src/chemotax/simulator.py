"""Time stepping for the attraction-repulsion chemotaxis system.

Each step first updates the signals ``v`` (attractant) and ``w``
(repellent), then advances the cell density ``u`` with a semi-implicit
step: diffusion and transport are implicit in ``u`` while the gradients of
``v`` and ``w`` are frozen.  Because every column of the transport matrix
sums to zero, the step conserves ``int u`` up to the linear-solver
tolerance.

* ``tau=0`` (local): ``(K + beta M) v_j = M f(u_j)``, likewise ``w_j``;
  then ``u_{j+1}`` from ``(u_j, v_j, w_j)``.
* ``tau=1``: implicit Euler for ``v_{j+1}, w_{j+1}`` from ``(u_j, v_j, w_j)``,
  then ``u_{j+1}`` from ``(u_j, v_{j+1}, w_{j+1})``.
* nonlocal: ``K v_j = M (f(u_j) - mean f(u_j))`` with ``int v_j = 0``.

A run stops at the first step with ``max u >= blowup_threshold`` and
reports ``t_max_estimate = j * dt``.
"""
from __future__ import annotations

import csv
import enum
import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fem import Field, FieldLike, P1Space, f_production, g_production, integrate
from .linalg import SolveReport, bicgstab_solve, cg_solve, zero_mean_solve
from .mesh import TriMesh
from .theory import ModelParams

logger = logging.getLogger(__name__)

__all__ = [
    "SolverFailure",
    "Outcome",
    "SteadyConfig",
    "SimState",
    "DiagnosticsRow",
    "SimResult",
    "chem_solve_elliptic",
    "chem_step_parabolic",
    "chem_solve_nonlocal",
    "cell_step",
    "step_rate",
    "detect_steady",
    "run",
    "write_diagnostics_csv",
    "DIAGNOSTICS_HEADER",
]

DIAGNOSTICS_HEADER = (
    "step", "time", "max_u", "min_u", "mass", "max_v", "max_w", "it_v", "it_w", "it_u",
)

CHEM_TOL = 1e-10
# 1e-8 lets mass drift past 1e-7 over a few hundred steps
TRANSPORT_TOL = 1e-11


class SolverFailure(RuntimeError):
    """A linear solve did not reach its tolerance."""

    def __init__(self, what: str, report: SolveReport):
        super().__init__(
            f"{what} solve failed after {report.iterations} iterations "
            f"(relative residual {report.final_residual:.3e})"
        )
        self.report = report


class Outcome(str, enum.Enum):
    BLOW_UP = "BlowUp"
    STEADY_STATE = "SteadyState"
    REACHED_T_END = "ReachedTEnd"
    SOLVER_FAILURE = "SolverFailure"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SteadyConfig:
    """Plateau detector settings.

    A run is steady once ``||u_{j+1} - u_j||_inf / (dt * max(||u_{j+1}||_inf, floor))``
    stays below ``rate_tol`` for ``consecutive`` steps in a row.
    """

    rate_tol: float = 1e-3
    consecutive: int = 100
    floor: float = 1e-30


@dataclass(frozen=True)
class SimState:
    step: int
    time: float
    u: Field
    v: Optional[Field] = None
    w: Optional[Field] = None


@dataclass(frozen=True)
class DiagnosticsRow:
    step: int
    time: float
    max_u: float
    min_u: float
    mass: float
    max_v: float
    max_w: float
    it_v: int
    it_w: int
    it_u: int

    def as_tuple(self):
        return tuple(getattr(self, k) for k in DIAGNOSTICS_HEADER)


@dataclass
class SimResult:
    outcome: Outcome
    t_max_estimate: Optional[float]
    rows: list[DiagnosticsRow]
    final_state: SimState
    message: str = ""
    accuracy_note: str = (
        "fixed mesh, no adaptive refinement: blow-up times are order-of-magnitude estimates"
    )

    @property
    def blew_up(self) -> bool:
        return self.outcome is Outcome.BLOW_UP


def _check(report: SolveReport, what: str) -> None:
    if not report.converged:
        raise SolverFailure(what, report)


def chem_solve_elliptic(K, M, coeff: float, source, tol: float = CHEM_TOL, x0=None):
    """Solve ``(K + coeff M) v = M source``.  Returns ``(v, report)``."""
    if not coeff > 0:
        raise ValueError("decay coefficient must be positive")
    A = K + coeff * M
    v, rep = cg_solve(A, M @ np.asarray(source, dtype=np.float64), tol=tol, x0=x0)
    _check(rep, "elliptic signal")
    return v, rep


def chem_step_parabolic(K, M, coeff: float, prev, source, dt: float, tol: float = CHEM_TOL):
    """One implicit Euler step of ``v_t = Delta v - coeff v + source``.

    Solves ``(M + dt K + dt coeff M) v_new = M (prev + dt source)``.
    Returns ``(v_new, report)``.
    """
    if not dt > 0 or not coeff > 0:
        raise ValueError("dt and the decay coefficient must be positive")
    prev = np.asarray(prev, dtype=np.float64)
    A = (1.0 + dt * coeff) * M + dt * K
    rhs = M @ (prev + dt * np.asarray(source, dtype=np.float64))
    v, rep = cg_solve(A, rhs, tol=tol, x0=prev)
    _check(rep, "parabolic signal")
    return v, rep


def chem_solve_nonlocal(K, M, source, tol: float = CHEM_TOL, x0=None):
    """Zero-mean solution of ``-Delta v = source - mean(source)``.  Returns ``(v, report)``."""
    v, rep = zero_mean_solve(K, M, M @ np.asarray(source, dtype=np.float64), tol=tol, x0=x0)
    _check(rep, "nonlocal signal")
    return v, rep


def cell_step(space: P1Space, u_prev, v, w, params: ModelParams, dt: float,
              tol: float = TRANSPORT_TOL):
    """Semi-implicit step for ``u``.

    Solves ``(M + dt K - dt chi C(v) + dt xi C(w)) u_new = M u_prev`` with
    BiCGSTAB; ``C`` is linear in its potential, so a single convection
    matrix ``C(xi w - chi v)`` is assembled.  Returns ``(u_new, report)``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    u_prev = np.asarray(u_prev, dtype=np.float64)
    potential = params.xi * np.asarray(w, dtype=np.float64) - params.chi * np.asarray(v, dtype=np.float64)
    data = space.M.data + dt * space.K.data + dt * space.convection_data(potential)
    A = space.csr(data)
    u, rep = bicgstab_solve(A, space.M @ u_prev, tol=tol, x0=u_prev)
    _check(rep, "cell transport")
    return u, rep


def step_rate(u_prev, u_curr, dt: float, floor: float = 1e-30) -> float:
    """Relative sup-norm rate of change between consecutive states."""
    u_prev = np.asarray(u_prev)
    u_curr = np.asarray(u_curr)
    scale = max(float(np.max(np.abs(u_curr))), floor)
    return float(np.max(np.abs(u_curr - u_prev))) / (dt * scale)


def detect_steady(rates, cfg: SteadyConfig = SteadyConfig()) -> bool:
    """True when the last ``cfg.consecutive`` step rates are all below ``cfg.rate_tol``."""
    rates = list(rates)
    if len(rates) < cfg.consecutive:
        return False
    return all(r < cfg.rate_tol for r in rates[-cfg.consecutive:])


def _as_values(mesh: TriMesh, f: FieldLike | None, name: str) -> np.ndarray | None:
    if f is None:
        return None
    if isinstance(f, Field) and f.mesh_id != mesh.uid:
        raise ValueError(f"initial {name} lives on a different mesh")
    vals = np.array(f, dtype=np.float64)
    if vals.shape != (mesh.n_vertices,):
        raise ValueError(f"initial {name} has {vals.size} values for {mesh.n_vertices} vertices")
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"initial {name} is not finite")
    return vals


def run(
    mesh: TriMesh,
    params: ModelParams,
    initial: SimState,
    dt: float = 1e-5,
    t_end: float = 0.1,
    blowup_threshold: float = 1e4,
    steady: SteadyConfig | None = SteadyConfig(),
    record_every: int = 10,
    chem_tol: float = CHEM_TOL,
    transport_tol: float = TRANSPORT_TOL,
    space: P1Space | None = None,
    on_row: Callable[[DiagnosticsRow], None] | None = None,
    on_state: Callable[[SimState], None] | None = None,
) -> SimResult:
    """Integrate from ``initial`` until blow-up, plateau, ``t_end`` or solver failure.

    Parameters
    ----------
    steady : SteadyConfig or None
        ``None`` disables plateau detection.
    record_every : int
        Diagnostics cadence in steps; the final step is always recorded.
    space : P1Space, optional
        Pre-built operators for ``mesh`` (lets callers reuse assembly).
    on_state : callable, optional
        Called with the full state at every step, once ``v`` and ``w`` are
        current.  Copies the fields, so leave it unset for speed.
    """
    if not dt > 0 or not t_end > 0 or not blowup_threshold > 0:
        raise ValueError("dt, t_end and blowup_threshold must be positive")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    u = _as_values(mesh, initial.u, "u")
    v = _as_values(mesh, initial.v, "v")
    w = _as_values(mesh, initial.w, "w")
    if params.tau == 1 and (v is None or w is None):
        raise ValueError("tau=1 needs initial v and w")
    if space is None:
        space = P1Space(mesh)
    elif space.mesh != mesh:
        raise ValueError("operator space was built on a different mesh")
    K, M = space.K, space.M
    p = params
    nonlocal_ = p.variant == "nonlocal"

    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    step0 = initial.step
    rates: deque[float] = deque(maxlen=steady.consecutive if steady else 1)
    rows: list[DiagnosticsRow] = []
    it_v = it_w = it_u = 0
    j = step0

    def state():
        return SimState(j, j * dt, Field.on(mesh, u),
                        None if v is None else Field.on(mesh, v),
                        None if w is None else Field.on(mesh, w))

    def record():
        row = DiagnosticsRow(
            step=j, time=j * dt,
            max_u=float(u.max()), min_u=float(u.min()), mass=integrate(mesh, u),
            max_v=float(v.max()), max_w=float(w.max()),
            it_v=it_v, it_w=it_w, it_u=it_u,
        )
        if not nonlocal_:
            for name, arr in (("v", v), ("w", w)):
                if arr.min() < -1e-8 * max(arr.max(), 0.0):
                    logger.debug("step %d: %s undershoot min=%.3e", j, name, arr.min())
        rows.append(row)
        if on_row is not None:
            on_row(row)

    def finish(outcome, t_max=None, message=""):
        if not rows or rows[-1].step != j:
            record()
        return SimResult(outcome, t_max, rows, state(), message)

    try:
        while True:
            if p.tau == 0:
                fu = f_production(u, p.alpha, p.k)
                gu = g_production(u, p.gamma0, p.l)
                if nonlocal_:
                    v, rv = chem_solve_nonlocal(K, M, fu, chem_tol, x0=v)
                    w, rw = chem_solve_nonlocal(K, M, gu, chem_tol, x0=w)
                else:
                    v, rv = chem_solve_elliptic(K, M, p.beta, fu, chem_tol, x0=v)
                    w, rw = chem_solve_elliptic(K, M, p.delta, gu, chem_tol, x0=w)
                it_v, it_w = rv.iterations, rw.iterations
            if on_state is not None:
                on_state(state())

            if (j - step0) % record_every == 0:
                record()
            if u.max() >= blowup_threshold:
                return finish(Outcome.BLOW_UP, j * dt)
            if steady is not None and detect_steady(rates, steady):
                return finish(Outcome.STEADY_STATE)
            if j - step0 >= n_steps:
                return finish(Outcome.REACHED_T_END)

            if p.tau == 1:
                fu = f_production(u, p.alpha, p.k)
                gu = g_production(u, p.gamma0, p.l)
                v, rv = chem_step_parabolic(K, M, p.beta, v, fu, dt, chem_tol)
                w, rw = chem_step_parabolic(K, M, p.delta, w, gu, dt, chem_tol)
                it_v, it_w = rv.iterations, rw.iterations

            u_new, ru = cell_step(space, u, v, w, p, dt, transport_tol)
            it_u = ru.iterations
            if not np.all(np.isfinite(u_new)):
                raise SolverFailure("cell transport", ru)
            if steady is not None:
                rates.append(step_rate(u, u_new, dt, steady.floor))
            u = u_new
            j += 1
    except SolverFailure as exc:
        logger.warning("step %d: %s", j, exc)
        if v is None or w is None:
            v = np.zeros_like(u) if v is None else v
            w = np.zeros_like(u) if w is None else w
        return finish(Outcome.SOLVER_FAILURE, message=str(exc))


def write_diagnostics_csv(rows, path) -> None:
    """Write diagnostics rows with the fixed header; floats use ``repr``."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(DIAGNOSTICS_HEADER)
        for r in rows:
            wr.writerow([repr(x) if isinstance(x, float) else x for x in r.as_tuple()])
