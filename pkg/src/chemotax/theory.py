"""Boundedness classifiers and interpolation-exponent calculators.

Everything here is a pure function of its arguments.  Verdicts are
*sufficient-condition guarantees*: ``NoGuarantee`` means no proved
criterion applies, not that the solution blows up.

Production laws are ``f(s) = alpha s^k`` (attractant) and
``g(s) = gamma0 (1 + s)^l`` (repellent); ``Theta0 = chi alpha - xi gamma0``
measures whether attraction or repulsion dominates when ``k == l``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace

__all__ = [
    "ModelParams",
    "Verdict",
    "RegimeVerdict",
    "Interval",
    "theta0",
    "classify",
    "gn_theta",
    "gn_theta1",
    "gn_theta2",
    "gradient_range",
    "interval_I",
    "interval_J",
    "equilibrium",
    "power_mean_gap",
]


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the attraction-repulsion system.

    ``gamma1`` defaults to ``gamma0`` (the simulator uses ``g = gamma0 (1+s)^l``).
    ``n`` is only consulted by :func:`classify`; the simulator is planar.
    """

    k: float
    l: float
    alpha: float = 1.0
    gamma0: float = 1.0
    chi: float = 1.0
    xi: float = 1.0
    beta: float = 1.0
    delta: float = 1.0
    gamma1: float | None = None
    tau: int = 0
    variant: str = "local"
    n: int = 2

    def __post_init__(self):
        if self.gamma1 is None:
            object.__setattr__(self, "gamma1", self.gamma0)
        for name in ("chi", "xi", "alpha", "beta", "gamma0", "gamma1", "delta", "k", "l"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be a positive finite number, got {val!r}")
        if self.gamma1 < self.gamma0:
            raise ValueError("gamma1 must be >= gamma0")
        if self.tau not in (0, 1):
            raise ValueError(f"tau must be 0 or 1, got {self.tau!r}")
        if self.variant not in ("local", "nonlocal"):
            raise ValueError(f"variant must be 'local' or 'nonlocal', got {self.variant!r}")
        if self.variant == "nonlocal" and self.tau != 0:
            raise ValueError("the nonlocal variant is stationary in v, w: tau must be 0")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")

    @property
    def theta0(self) -> float:
        return theta0(self)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


class Verdict(str, enum.Enum):
    BOUNDED = "BoundedGuaranteed"
    NO_GUARANTEE = "NoGuarantee"
    BLOWUP_POSSIBLE = "BlowUpPossible"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RegimeVerdict:
    verdict: Verdict
    matched_condition: str

    def __str__(self):
        return f"{self.verdict.value}: {self.matched_condition}"


@dataclass(frozen=True)
class Interval:
    """Real interval with explicit endpoint closure."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False

    def __contains__(self, x: float) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


def theta0(params: ModelParams) -> float:
    """``chi * alpha - xi * gamma0``."""
    return params.chi * params.alpha - params.xi * params.gamma0


def interval_I(n: int) -> Interval:
    """``(0, 1/n]``: production exponents with unrestricted gradient integrability."""
    return Interval(0.0, 1.0 / n, lo_closed=False, hi_closed=True)


def interval_J(n: int) -> Interval:
    """``(1/n, 1/n + 2/(n^2 + 4))``, the open window admitted for tau = 1."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return Interval(1.0 / n, 1.0 / n + 2.0 / (n * n + 4), lo_closed=False, hi_closed=False)


def _subcritical(n: int) -> Interval:
    return Interval(0.0, 2.0 / n, lo_closed=False, hi_closed=False)


def _classify_elliptic(p: ModelParams) -> RegimeVerdict:
    k, l, th, sub = p.k, p.l, theta0(p), _subcritical(p.n)
    if k < l:
        return RegimeVerdict(Verdict.BOUNDED, "tau=0: k < l")
    if k in sub and l in sub:
        return RegimeVerdict(Verdict.BOUNDED, "tau=0: k, l in (0, 2/n)")
    if k == l and th < 0:
        return RegimeVerdict(Verdict.BOUNDED, "tau=0: k = l and Theta0 < 0")
    # k == l in (0, 2/n) with Theta0 >= 0 is already covered above
    return RegimeVerdict(Verdict.NO_GUARANTEE, "tau=0: no boundedness criterion applies")


def _classify_parabolic(p: ModelParams) -> RegimeVerdict:
    I, J = interval_I(p.n), interval_J(p.n)
    k, l = p.k, p.l
    if k in I and l in I:
        return RegimeVerdict(Verdict.BOUNDED, "tau=1: k, l in I = (0, 1/n]")
    if (l in J and k in I) or (k in J and l in I):
        return RegimeVerdict(Verdict.BOUNDED, "tau=1: one of k, l in I, the other in J")
    if k in J and l in J:
        return RegimeVerdict(Verdict.BOUNDED, "tau=1: k, l in J = (1/n, 1/n + 2/(n^2+4))")
    return RegimeVerdict(Verdict.NO_GUARANTEE, "tau=1: k or l outside I and J")


def _classify_nonlocal(p: ModelParams) -> RegimeVerdict:
    k, l, th, n = p.k, p.l, theta0(p), p.n
    if k < l:
        return RegimeVerdict(Verdict.BOUNDED, "nonlocal: k < l")
    if k == l and th < 0:
        return RegimeVerdict(Verdict.BOUNDED, "nonlocal: k = l and Theta0 < 0")
    if k == l and k in _subcritical(n):
        return RegimeVerdict(Verdict.BOUNDED, "nonlocal: k = l in (0, 2/n) and Theta0 >= 0")
    if k in _subcritical(n):
        return RegimeVerdict(Verdict.BOUNDED, "nonlocal: 0 < k < 2/n (known literature result)")
    if k > l and k > 2.0 / n:
        return RegimeVerdict(
            Verdict.BLOWUP_POSSIBLE, "nonlocal: k > l and k > 2/n (known blow-up result)"
        )
    return RegimeVerdict(Verdict.NO_GUARANTEE, "nonlocal: no criterion applies")


def classify(params: ModelParams) -> RegimeVerdict:
    """Apply the boundedness (and, for the nonlocal model, blow-up) criteria.

    Inequalities are evaluated exactly as stated; boundary values such as
    ``k == 2/n`` are not covered by any criterion and give ``NoGuarantee``.

    >>> classify(ModelParams(k=0.3, l=0.7)).verdict.value
    'BoundedGuaranteed'
    """
    if params.variant == "nonlocal":
        return _classify_nonlocal(params)
    if params.tau == 0:
        return _classify_elliptic(params)
    return _classify_parabolic(params)


def gn_theta(n: int, p: float) -> float:
    """Gagliardo-Nirenberg exponent for ``||u^{p/2}||_{L^2}`` against ``L^{2/p}``.

    Requires ``p > max(1, n/2)``; the result then lies in (0, 1).
    """
    if n < 1 or not p > max(1.0, n / 2.0):
        raise ValueError(f"need n >= 1 and p > max(1, n/2); got n={n}, p={p}")
    return (n * p / 2.0) * (1.0 - 1.0 / p) / (1.0 - n / 2.0 + n * p / 2.0)


def gn_theta1(n: int, p: float, l: float) -> tuple[float, float]:
    """Exponent used to absorb ``(int u^l)^{(p+l)/l}``.

    Returns ``(theta1, (p + l)/p * theta1)``; both lie in (0, 1) whenever
    ``l > 1`` and ``p > max(l, l (n l - 2)/n, n/2)``.
    """
    if n < 1 or not l > 1:
        raise ValueError(f"need n >= 1 and l > 1; got n={n}, l={l}")
    bound = max(l, l * (n * l - 2.0) / n, n / 2.0)
    if not p > bound:
        raise ValueError(f"need p > {bound:g} for n={n}, l={l}; got p={p}")
    t1 = (1.0 - 1.0 / l) / (1.0 + 2.0 / (n * p) - 1.0 / p)
    composite = (p + l) * (l - 1.0) / (l * (p - 1.0 + 2.0 / n))
    return t1, composite


def gn_theta2(n: int, p: float, k: float) -> tuple[float, float]:
    """Exponent used to absorb ``int u^{p+k}``.

    Returns ``(theta2, (p + k)/p * theta2)``.  The composite exponent equals
    ``(p + k - 1)/(p - 1 + 2/n)`` and is below one exactly when ``k < 2/n``.
    Requires ``n >= 2``, ``p > n/2``, ``k > 0`` and ``k (n - 2) < 2 p`` (the
    last keeps ``theta2 < 1`` for ``n > 2``).
    """
    if n < 2 or not p > n / 2.0 or not k > 0:
        raise ValueError(f"need n >= 2, p > n/2, k > 0; got n={n}, p={p}, k={k}")
    if not k * (n - 2) < 2.0 * p:
        raise ValueError(f"theta2 >= 1 for k={k} with n={n}, p={p}")
    t2 = (p / 2.0 - p / (2.0 * (p + k))) / (p / 2.0 + 1.0 / n - 0.5)
    composite = (p + k - 1.0) / (p - 1.0 + 2.0 / n)
    return t2, composite


def gradient_range(exponent: float, n: int) -> Interval:
    """Range of ``r`` with ``grad v`` uniformly bounded in ``L^r``.

    For a production exponent ``e`` in (0, 1]: ``[1, inf)`` if ``e <= 1/n``,
    otherwise ``[1, n / (n e - 1))``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 < exponent <= 1:
        raise ValueError(f"exponent must lie in (0, 1], got {exponent}")
    if exponent <= 1.0 / n:
        return Interval(1.0, math.inf, lo_closed=True, hi_closed=False)
    return Interval(1.0, n / (n * exponent - 1.0), lo_closed=True, hi_closed=False)


def equilibrium(params: ModelParams, mass: float, area: float) -> tuple[float, float, float]:
    """Constant steady state ``(m/|Omega|, alpha/beta u^k, gamma0/delta (1+u)^l)``.

    For the nonlocal variant the signal deviations vanish at a constant
    state, so ``(m/|Omega|, 0, 0)`` is returned.
    """
    if mass < 0 or not area > 0:
        raise ValueError("need mass >= 0 and area > 0")
    u = mass / area
    if params.variant == "nonlocal":
        return u, 0.0, 0.0
    v = params.alpha / params.beta * u**params.k
    w = params.gamma0 / params.delta * (1.0 + u) ** params.l
    return u, v, w


def power_mean_gap(a, b, p):
    """``2^(p-1) (a^p + b^p) - (a + b)^p``, nonnegative for a, b >= 0 and p >= 1."""
    return 2.0 ** (p - 1.0) * (a**p + b**p) - (a + b) ** p
