"""Run configuration, initial-data presets and parameter sweeps.

Configuration files are plain ``key=value`` text (several pairs may share a
line, ``#`` starts a comment).  A sweep file is a configuration file whose
``row`` lines each carry the overrides for one simulation::

    n_rings=30
    t_end=0.05
    row tau=0 k=0.5 l=0.5 alpha=0.86 gamma0=0.5
    row tau=0 k=1.2 l=1 alpha=0.8 gamma0=1
"""
from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .fem import Field, P1Space, interpolate
from .mesh import TriMesh, generate_disk_mesh, load_mesh
from .simulator import Outcome, SimResult, SimState, SteadyConfig, run
from .theory import ModelParams, RegimeVerdict, Verdict, classify, theta0

logger = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "RunConfig",
    "SweepSpec",
    "SweepRow",
    "SweepReport",
    "PRESETS",
    "preset_initial",
    "preset_label",
    "parse_config",
    "parse_config_text",
    "parse_sweep",
    "parse_sweep_text",
    "build_mesh",
    "simulate",
    "run_sweep",
    "write_sweep_csv",
    "default_parallelism",
    "REFERENCE_SWEEP",
]


class ConfigError(ValueError):
    """Bad configuration key, value or combination."""


PRESETS = ("gaussian_bell_u", "gaussian_v", "constant")


def _preset_func(preset: str, amplitude: float):
    if preset == "gaussian_bell_u":
        return lambda x, y: amplitude * np.exp(-(x * x + y * y)) * (81.0 - (x * x + y * y))
    if preset == "gaussian_v":
        return lambda x, y: amplitude * np.exp(-(x * x + y * y))
    if preset == "constant":
        return lambda x, y: np.full_like(x, amplitude)
    raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")


def preset_initial(preset: str, amplitude: float, mesh: TriMesh) -> Field:
    """Interpolate a named initial profile on ``mesh``.

    ``gaussian_bell_u``: ``amp * exp(-r^2) * (81 - r^2)`` (vanishes on r = 9);
    ``gaussian_v``: ``amp * exp(-r^2)``; ``constant``: ``amp``.
    """
    return interpolate(mesh, _preset_func(preset, amplitude))


def preset_label(preset: str, amplitude: float) -> str:
    a = f"{amplitude:g}"
    return {
        "gaussian_bell_u": f"{a}*exp(-r^2)*(81-r^2)",
        "gaussian_v": f"{a}*exp(-r^2)",
        "constant": a,
    }[preset]


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one simulation."""

    # model
    tau: int = 0
    variant: str = "local"
    k: float = 1.1
    l: float = 1.2
    chi: float = 1.0
    xi: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    gamma0: float = 1.0
    gamma1: Optional[float] = None
    delta: float = 1.0
    # mesh
    radius: float = 9.0
    n_rings: int = 40
    mesh_file: Optional[str] = None
    # time stepping
    dt: float = 1e-5
    t_end: float = 0.1
    blowup_threshold: float = 1e4
    steady_rate_tol: float = 1e-3
    steady_consecutive: int = 100
    record_every: int = 10
    chem_tol: float = 1e-10
    transport_tol: float = 1e-11
    # initial data
    u0: str = "gaussian_bell_u"
    u0_amp: float = 15.0
    v0: str = "gaussian_v"
    v0_amp: float = 1.0
    w0: str = "gaussian_v"
    w0_amp: float = 1.0
    output_dir: str = "out"

    def __post_init__(self):
        for name in ("dt", "t_end", "blowup_threshold", "radius", "chem_tol",
                     "transport_tol", "steady_rate_tol"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ConfigError(f"{name} must be positive, got {val!r}")
        for name in ("n_rings", "record_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.steady_consecutive < 0:
            raise ConfigError("steady_consecutive must be >= 0 (0 disables plateau detection)")
        for name in ("u0", "v0", "w0"):
            if getattr(self, name) not in PRESETS:
                raise ConfigError(f"{name}: unknown preset {getattr(self, name)!r}")
            amp = getattr(self, name + "_amp")
            if not (math.isfinite(amp) and amp >= 0):
                raise ConfigError(f"{name}_amp must be finite and >= 0, got {amp!r}")
        try:
            self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def params(self) -> ModelParams:
        return ModelParams(
            k=self.k, l=self.l, alpha=self.alpha, gamma0=self.gamma0, chi=self.chi,
            xi=self.xi, beta=self.beta, delta=self.delta, gamma1=self.gamma1,
            tau=self.tau, variant=self.variant,
        )

    @property
    def steady(self) -> SteadyConfig | None:
        if self.steady_consecutive == 0:
            return None
        return SteadyConfig(rate_tol=self.steady_rate_tol, consecutive=self.steady_consecutive)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if val is None:
                continue
            lines.append(f"{f.name}={repr(val) if isinstance(val, float) else val}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {
    "tau": int, "n_rings": int, "record_every": int, "steady_consecutive": int,
    "variant": str, "mesh_file": str, "u0": str, "v0": str, "w0": str, "output_dir": str,
}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES.get(key, float)
    if kind is str:
        return raw
    if kind is int:
        val = float(raw)
        if val != int(val):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(val)
    return float(raw)


_KEYS = {f.name for f in fields(RunConfig)}


def _parse_pairs(tokens, lineno, where) -> dict:
    out = {}
    for tok in tokens:
        key, sep, raw = tok.partition("=")
        if not sep:
            raise ConfigError(f"{where}line {lineno}: expected key=value, got {tok!r}")
        if key not in _KEYS:
            raise ConfigError(f"{where}line {lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, raw)
        except ValueError:
            raise ConfigError(f"{where}line {lineno}: bad value for {key}: {raw!r}") from None
    return out


def _build(values: dict, where: str, line_of: dict) -> RunConfig:
    try:
        return RunConfig(**values)
    except ConfigError as exc:
        msg = str(exc)
        key = msg.split()[0].rstrip(":")
        if key in line_of:
            raise ConfigError(f"{where}line {line_of[key]}: {msg}") from None
        raise ConfigError(f"{where}{msg}") from None


def parse_config_text(text: str, where: str = "") -> RunConfig:
    values, line_of = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        pairs = _parse_pairs(tokens, lineno, where)
        values.update(pairs)
        line_of.update({k: lineno for k in pairs})
    return _build(values, where, line_of)


def parse_config(path) -> RunConfig:
    """Read a ``key=value`` configuration file; unspecified keys take defaults."""
    return parse_config_text(Path(path).read_text(), where=f"{path}: ")


@dataclass(frozen=True)
class SweepSpec:
    base: RunConfig
    rows: tuple[dict, ...]

    def __post_init__(self):
        if not self.rows:
            raise ConfigError("sweep spec has no rows")

    def configs(self) -> list[RunConfig]:
        return [replace(self.base, **row) for row in self.rows]

    def to_text(self) -> str:
        out = [self.base.to_text().rstrip("\n")]
        for row in self.rows:
            pairs = " ".join(f"{k}={repr(v) if isinstance(v, float) else v}" for k, v in row.items())
            out.append(f"row {pairs}")
        return "\n".join(out) + "\n"


def parse_sweep_text(text: str, where: str = "") -> SweepSpec:
    base, line_of, rows = {}, {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        if tokens[0] == "row":
            rows.append((lineno, _parse_pairs(tokens[1:], lineno, where)))
        else:
            pairs = _parse_pairs(tokens, lineno, where)
            base.update(pairs)
            line_of.update({k: lineno for k in pairs})
    base_cfg = _build(base, where, line_of)
    for lineno, row in rows:
        try:
            replace(base_cfg, **row)
        except ConfigError as exc:
            raise ConfigError(f"{where}line {lineno}: {exc}") from None
    return SweepSpec(base_cfg, tuple(r for _, r in rows))


def parse_sweep(path) -> SweepSpec:
    return parse_sweep_text(Path(path).read_text(), where=f"{path}: ")


def build_mesh(cfg: RunConfig) -> TriMesh:
    if cfg.mesh_file:
        return load_mesh(cfg.mesh_file)
    return generate_disk_mesh(cfg.radius, cfg.n_rings)


def initial_state(cfg: RunConfig, mesh: TriMesh) -> SimState:
    u0 = preset_initial(cfg.u0, cfg.u0_amp, mesh)
    v0 = w0 = None
    if cfg.tau == 1:
        v0 = preset_initial(cfg.v0, cfg.v0_amp, mesh)
        w0 = preset_initial(cfg.w0, cfg.w0_amp, mesh)
    return SimState(0, 0.0, u0, v0, w0)


def simulate(cfg: RunConfig, mesh: TriMesh | None = None, space: P1Space | None = None) -> SimResult:
    """Run the simulation described by ``cfg``."""
    mesh = build_mesh(cfg) if mesh is None else mesh
    return run(
        mesh, cfg.params(), initial_state(cfg, mesh),
        dt=cfg.dt, t_end=cfg.t_end, blowup_threshold=cfg.blowup_threshold,
        steady=cfg.steady, record_every=cfg.record_every,
        chem_tol=cfg.chem_tol, transport_tol=cfg.transport_tol, space=space,
    )


@dataclass(frozen=True)
class SweepRow:
    index: int
    u0: str
    v0: str
    w0: str
    tau: int
    k: float
    l: float
    theta0: float
    outcome: str
    t_max: Optional[float]
    verdict: str
    matched_condition: str
    message: str = ""

    @property
    def t_max_label(self) -> str:
        if self.outcome in (Outcome.STEADY_STATE.value, Outcome.REACHED_T_END.value):
            return "+inf"
        if self.t_max is None:
            return ""
        return f"{self.t_max:.6g}"

    @property
    def contradicts_theory(self) -> bool:
        return self.outcome == Outcome.BLOW_UP.value and self.verdict == Verdict.BOUNDED.value


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def contradictions(self) -> list[SweepRow]:
        return [r for r in self.rows if r.contradicts_theory]


def _sweep_one(args) -> SweepRow:
    index, cfg = args
    verdict: RegimeVerdict = classify(cfg.params())
    common = dict(
        index=index,
        u0=preset_label(cfg.u0, cfg.u0_amp),
        v0=preset_label(cfg.v0, cfg.v0_amp) if cfg.tau == 1 else "",
        w0=preset_label(cfg.w0, cfg.w0_amp) if cfg.tau == 1 else "",
        tau=cfg.tau, k=cfg.k, l=cfg.l, theta0=theta0(cfg.params()),
        verdict=verdict.verdict.value, matched_condition=verdict.matched_condition,
    )
    try:
        res = simulate(cfg)
    except Exception as exc:  # a failing row must not stop the sweep
        logger.exception("sweep row %d failed", index)
        return SweepRow(outcome=Outcome.SOLVER_FAILURE.value, t_max=None, message=str(exc), **common)
    return SweepRow(outcome=res.outcome.value, t_max=res.t_max_estimate, message=res.message, **common)


def default_parallelism() -> int:
    cap = os.environ.get("CHEMOTAX_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"CHEMOTAX_THREADS must be an integer, got {cap!r}") from None
    return n


def run_sweep(spec: SweepSpec, parallelism: int | None = None) -> SweepReport:
    """Run every row (up to ``parallelism`` at once) and collect a report in row order."""
    if not spec.rows:
        raise ConfigError("sweep spec has no rows")
    limit = default_parallelism() if parallelism is None else max(1, int(parallelism))
    limit = min(limit, default_parallelism())
    jobs = list(enumerate(spec.configs(), start=1))
    if limit == 1 or len(jobs) == 1:
        rows = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(limit, len(jobs))) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    report = SweepReport(rows)
    for r in report.contradictions:
        logger.error(
            "row %d blew up although theory guarantees boundedness (%s)",
            r.index, r.matched_condition,
        )
    return report


SWEEP_COLUMNS = (
    "row", "tau", "u0", "v0", "w0", "k", "l", "theta0", "outcome", "t_max",
    "verdict", "matched_condition",
)


def write_sweep_csv(report: SweepReport, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SWEEP_COLUMNS)
        for r in report.rows:
            wr.writerow([
                r.index, r.tau, r.u0, r.v0, r.w0, f"{r.k:g}", f"{r.l:g}",
                f"{r.theta0:.6g}", r.outcome, r.t_max_label, r.verdict, r.matched_condition,
            ])


# Reference sweep: chi = xi = 1, and (alpha, gamma0) chosen so that
# alpha - gamma0 hits each listed Theta0.
REFERENCE_SWEEP = """\
# Seven-row k, l, Theta0 sweep with reference outcomes.
n_rings=30
dt=1e-5
t_end=0.05
record_every=100
u0=gaussian_bell_u
u0_amp=15
v0=gaussian_v
w0=gaussian_v
w0_amp=1
row tau=0 k=0.5 l=0.5 alpha=0.86 gamma0=0.5
row tau=0 k=1.2 l=1 alpha=0.8 gamma0=1
row tau=0 k=0.8 l=0.6 alpha=0.36 gamma0=1
row tau=1 k=1 l=0.8 alpha=0.8 gamma0=1 v0_amp=1
row tau=1 k=0.5 l=0.5 alpha=1.02 gamma0=0.5 v0_amp=1
row tau=1 k=1 l=0.8 alpha=0.8 gamma0=1 v0_amp=5
row tau=1 k=0.8 l=0.8 alpha=0.42 gamma0=1 v0_amp=5
"""
