"""Solvers for the fixed rejection thresholds of the scale-mixture rules.

Every rule here rejects a coordinate when x**2 / sigma0**2 >= omega**2 and
differs only in how omega is pinned down: by the oracle likelihood-ratio
cutoff, by fixing the Bayes false discovery rate, or by the plug-in rule
that mimics the step-up procedure.  All three defining equations are
strictly monotone in omega, so all three are solved the same way:
geometric bracket expansion from omega = 1, then bisection to machine
precision.  The equations are evaluated in log form because the density
and survival ratios involved would under- or overflow long before the
interesting thresholds are reached.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from .distributions import TailModel, log_density, log_survival, lr_small_x_limit
from .regime import AsymptoticRegime, TestingProblem, bfdr_floor
from .rootfind import BracketError, bisect_increasing, expand_bracket


class ThresholdStatus(enum.Enum):
    INTERIOR = "interior"
    REJECT_ALL = "reject-all"
    REJECT_NONE = "reject-none"


@dataclass(frozen=True)
class ThresholdResult:
    """Solved threshold plus how the defining equation resolved.

    ``residual`` is the relative defining-equation error |lhs/target - 1|
    at ``omega``.  For the two boundary statuses there is no equation to
    solve; ``omega`` is pinned to 0 (reject everything) or +inf (reject
    nothing) and the residual is 0 by convention.
    """

    omega: float
    residual: float
    status: ThresholdStatus


_REJECT_ALL = ThresholdResult(0.0, 0.0, ThresholdStatus.REJECT_ALL)
_REJECT_NONE = ThresholdResult(math.inf, 0.0, ThresholdStatus.REJECT_NONE)


def _solve(gap: Callable[[float], float]) -> float | ThresholdResult:
    """Root of an increasing log-form equation gap(omega) = 0.

    When the crossing sits beyond the representable range (a target within
    a few ulps of the equation's open endpoint), the rule is a boundary
    rule for every practical purpose and is returned as one.
    """
    try:
        lo, hi = expand_bracket(gap)
    except BracketError:
        return _REJECT_ALL if gap(1.0) > 0.0 else _REJECT_NONE
    return bisect_increasing(gap, lo, hi)


def oracle_threshold(model: TailModel, problem: TestingProblem) -> ThresholdResult:
    """Likelihood-ratio cutoff: solve s * d(omega*s) / d(omega) = v.

    Here s = theta**-0.5 and the left side is the marginal likelihood
    ratio of the inflated scale against the null at |x| = omega.  It
    increases from a small-x limit (s for the polynomial-at-zero members,
    0 for inverse-gamma) to theta**(gamma/2), so a v at or beyond an
    endpoint becomes a boundary status rather than a root.
    """
    theta = problem.theta
    v = problem.v
    log_v = math.log(v)
    # checked in both scales: either rounding of the sup may lose an ulp
    if v >= theta ** (0.5 * model.gamma) or log_v >= 0.5 * model.gamma * math.log(theta):
        return _REJECT_NONE
    floor = lr_small_x_limit(model, theta)
    if floor > 0.0 and v <= floor:
        return _REJECT_ALL
    s = 1.0 / math.sqrt(theta)
    log_s = math.log(s)

    def gap(omega: float) -> float:
        if omega == 0.0:
            # reached only for families whose ratio tends to 0 at the origin
            return -math.inf
        return log_s + log_density(model, omega * s) - log_density(model, omega) - log_v

    omega = _solve(gap)
    if isinstance(omega, ThresholdResult):
        return omega
    return ThresholdResult(omega, abs(math.expm1(gap(omega))), ThresholdStatus.INTERIOR)


def oracle_threshold_t_closed_form(gamma: float, theta: float, v: float) -> float:
    """Student-t oracle threshold in closed form, independent of the solver.

    The density-ratio equation rearranges to a linear equation in omega**2:
    omega**2 = gamma * (A - 1) / (1 - A / theta) with
    A = (v * sqrt(theta))**(2 / (gamma + 1)).
    """
    if not (gamma > 0.0 and theta > 1.0):
        raise ValueError("need gamma > 0 and theta > 1")
    if not theta**-0.5 < v < theta ** (0.5 * gamma):
        raise ValueError("v outside the interior range (theta**-0.5, theta**(gamma/2))")
    a = (v * math.sqrt(theta)) ** (2.0 / (gamma + 1.0))
    return math.sqrt(gamma * (a - 1.0) / (1.0 - a / theta))


def oracle_threshold_asymptotic(regime: AsymptoticRegime, v: float, gamma: float) -> float:
    """Squared-threshold approximation C * (v / C0)**(2/gamma)."""
    return regime.c * (v / regime.c0) ** (2.0 / gamma)


def bfdr_threshold(model: TailModel, problem: TestingProblem, alpha: float) -> ThresholdResult:
    """Fixed threshold holding the Bayes false discovery rate at alpha.

    Solves S(omega) / S(omega * s) = r_alpha / f, r_alpha = alpha/(1-alpha).
    The survival ratio decreases from 1 at the origin to theta**(-gamma/2),
    so the rule is interior exactly for alpha in (beta*, 1 - p): at or
    below the floor beta* no finite threshold is strict enough, while at
    1 - p the zero threshold already achieves the level.
    """
    if alpha >= 1.0 - problem.p:
        return _REJECT_ALL
    if alpha <= bfdr_floor(model, problem):
        return _REJECT_NONE
    s = 1.0 / math.sqrt(problem.theta)
    log_target = math.log(alpha / (1.0 - alpha)) - math.log(problem.f)

    def gap(omega: float) -> float:
        if omega == 0.0:
            return log_target  # the survival ratio is exactly 1 there
        return log_target - (log_survival(model, omega) - log_survival(model, omega * s))

    omega = _solve(gap)
    if isinstance(omega, ThresholdResult):
        return omega
    return ThresholdResult(omega, abs(math.expm1(-gap(omega))), ThresholdStatus.INTERIOR)


def bfdr_threshold_asymptotic(
    model: TailModel, regime: AsymptoticRegime, f: float, alpha: float
) -> float:
    """Squared-threshold approximation C_B * (f / r_alpha)**(2/gamma)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    r_alpha = alpha / (1.0 - alpha)
    return regime.c_b * (f / r_alpha) ** (2.0 / model.gamma)


def gw_threshold(model: TailModel, problem: TestingProblem, alpha: float) -> ThresholdResult:
    """Threshold whose mixture-tail mass beyond it is an alpha-fraction null.

    Solves S(omega) / [(1-p) S(omega) + p S(omega * s)] = alpha.  This is
    the fixed rule the step-up procedure concentrates around.  It solves
    its own equation; algebraically the root coincides with the BFDR rule
    at level alpha * (1 - p), which the tests use as a cross-check.
    """
    p = problem.p
    if not 0.0 < p < 1.0:
        raise ValueError("the plug-in rule needs p in (0, 1)")
    if alpha >= 1.0:
        return _REJECT_ALL
    if alpha * (1.0 - p) <= bfdr_floor(model, problem):
        return _REJECT_NONE
    s = 1.0 / math.sqrt(problem.theta)
    log_alpha = math.log(alpha)
    log_p = math.log(p)
    log_1mp = math.log1p(-p)

    def gap(omega: float) -> float:
        if omega == 0.0:
            return log_alpha  # lhs is exactly 1 there
        # excess = log of S(omega*s)/S(omega), in [0, (gamma/2) log theta]
        excess = log_survival(model, omega * s) - log_survival(model, omega)
        return log_alpha + float(np.logaddexp(log_1mp, log_p + excess))

    omega = _solve(gap)
    if isinstance(omega, ThresholdResult):
        return omega
    return ThresholdResult(omega, abs(math.expm1(-gap(omega))), ThresholdStatus.INTERIOR)


def bfdr_of_threshold(model: TailModel, problem: TestingProblem, omega: float) -> float:
    """Bayes false discovery rate of the rule rejecting at |x|/sigma0 >= omega.

    Evaluates (1-p) S(omega) / [(1-p) S(omega) + p S(omega * s)]: equal to
    1 - p at omega = 0, strictly decreasing, tending to the floor beta*.
    """
    if not omega >= 0.0:
        raise ValueError("omega must be nonnegative")
    p = problem.p
    if p == 0.0:
        return 1.0  # no signals: every rejection is a false one
    if math.isinf(omega):
        return bfdr_floor(model, problem)
    s = 1.0 / math.sqrt(problem.theta)
    excess = log_survival(model, omega * s) - log_survival(model, omega)
    return float(expit(math.log1p(-p) - math.log(p) - excess))
