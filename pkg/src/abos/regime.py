"""Testing problem description and the sparse-regime constants.

A :class:`TestingProblem` is one finite configuration: m coordinates, signal
fraction p, null scale sigma0, variance inflation u (signal variance is
``sigma0**2 * (1 + u)``), and the two loss weights.  The derived quantities
``f = (1 - p) / p``, ``delta = delta0 / delta_a`` and ``v = delta * f`` are
what the threshold equations consume.

An :class:`AsymptoticRegime` collects the limiting constants attached to a
difficulty level C: the calibration constant C0 that links v to u through
``v = C0 * u**(gamma/2)``, the limiting type I / type II components C1 and
C2 of the per-signal risk, the BFDR threshold constant C_B, the level
``alpha_inf`` at which a BFDR-style rule tracks the oracle, and the floor
``beta_star_inf`` below which fixed BFDR levels stop being achievable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import rootfind
from .distributions import Sides, TailModel, cdf, density, log_density, survival


@dataclass(frozen=True)
class TestingProblem:
    """One finite mixture-testing configuration.

    ``p = 0`` is allowed so that all-null datasets can be generated; the
    derived odds f and v are infinite there and every calibration that needs
    them requires p > 0.
    """

    m: int
    p: float
    sigma0: float
    u: float
    delta0: float = 1.0
    delta_a: float = 1.0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if not 0.0 <= self.p < 1.0:
            raise ValueError("p must lie in [0, 1)")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not self.u > 0:
            raise ValueError("u must be positive")
        if not (self.delta0 > 0 and self.delta_a > 0):
            raise ValueError("loss weights must be positive")

    @property
    def f(self) -> float:
        return (1.0 - self.p) / self.p if self.p > 0 else math.inf

    @property
    def delta(self) -> float:
        return self.delta0 / self.delta_a

    @property
    def v(self) -> float:
        return self.delta * self.f

    @property
    def theta(self) -> float:
        return 1.0 + self.u

    @property
    def sigma1(self) -> float:
        return self.sigma0 * math.sqrt(1.0 + self.u)


@dataclass(frozen=True)
class AsymptoticRegime:
    c: float
    c0: float
    c1: float
    c2: float
    c_b: float
    alpha_inf: float
    beta_star_inf: float
    delta_inf: float


def c0_from_c(model: TailModel, c: float) -> float:
    """Calibration constant C0 = C**((gamma+1)/2) * d(sqrt(C)) / c_d.

    Strictly increasing in C with range (0, sup) where the supremum is at
    most 1 for every family here, so not every positive value is attainable.
    """
    if not c > 0:
        raise ValueError("difficulty C must be positive")
    g = model.gamma
    # log form: the power factor alone overflows for extreme C even though
    # the product is bounded by 1
    log_c0 = (
        0.5 * (g + 1.0) * math.log(c)
        + log_density(model, math.sqrt(c))
        - math.log(model.c_d)
    )
    return math.exp(log_c0)


def c_from_c0(model: TailModel, c0: float) -> float:
    """Inverse of :func:`c0_from_c` by bracketed bisection.

    Raises if ``c0`` is not attainable (the map is bounded above; e.g. it
    tends to 1 for Pareto as C grows).
    """
    if not c0 > 0:
        raise ValueError("C0 must be positive")

    def f(c: float) -> float:
        return c0_from_c(model, c) - c0

    try:
        lo, hi = rootfind.expand_bracket(f, start=1.0, lo_floor=1e-280, hi_ceil=1e280)
    except rootfind.BracketError as exc:
        raise ValueError(f"C0 = {c0:g} is outside the attainable range") from exc
    return rootfind.bisect_increasing(f, lo, hi)


def risk_components(model: TailModel, c: float) -> tuple[float, float]:
    """Limiting per-signal risk components (C1, C2) at difficulty C.

    C1 scales the type I part (as v * t1 -> C1) and C2 is the limiting
    type II probability.  Two-sided members carry the factor s = 2, the
    one-sided members s = 1.
    """
    if not c > 0:
        raise ValueError("difficulty C must be positive")
    s = 2.0 if model.sides is Sides.TWO_SIDED else 1.0
    root = math.sqrt(c)
    c1 = s * root * density(model, root) / model.gamma
    c2 = s * cdf(model, root) - (s - 1.0)
    return c1, c2


def compute_regime(model: TailModel, c: float, delta_inf: float = 1.0) -> AsymptoticRegime:
    """Bundle every limiting constant attached to difficulty C."""
    if not delta_inf > 0:
        raise ValueError("delta_inf must be positive")
    c0 = c0_from_c(model, c)
    c1, c2 = risk_components(model, c)
    g = model.gamma
    c_b = ((model.c_d / g) / survival(model, math.sqrt(c))) ** (2.0 / g)
    alpha_inf = 1.0 / (1.0 + delta_inf * (1.0 - c2) / c1)
    beta_star_inf = 1.0 / (1.0 + delta_inf / c0)
    return AsymptoticRegime(
        c=float(c),
        c0=c0,
        c1=c1,
        c2=c2,
        c_b=c_b,
        alpha_inf=alpha_inf,
        beta_star_inf=beta_star_inf,
        delta_inf=float(delta_inf),
    )


def optimal_alpha(regime: AsymptoticRegime) -> float:
    """Level at which a BFDR rule matches the oracle risk in the limit."""
    return 1.0 / (1.0 + regime.delta_inf * (1.0 - regime.c2) / regime.c1)


def bfdr_floor(model: TailModel, problem: TestingProblem) -> float:
    """Smallest achievable BFDR, beta* = 1 / (1 + theta**(gamma/2) / f).

    Below this level the BFDR equation has no finite root and the matching
    rule rejects nothing.
    """
    if problem.p == 0:
        # no signals: every fixed rule has BFDR 1, so nothing below 1 is
        # achievable
        return 1.0
    log_ratio = 0.5 * model.gamma * math.log1p(problem.u) - math.log(problem.f)
    return 1.0 / (1.0 + math.exp(log_ratio))


def u_from_difficulty(model: TailModel, c: float, v: float) -> float:
    """Variance inflation that puts (v, u) on the difficulty-C calibration.

    Inverts ``v = C0 * u**(gamma/2)``.
    """
    if not v > 0:
        raise ValueError("v must be positive")
    c0 = c0_from_c(model, c)
    return (v / c0) ** (2.0 / model.gamma)
