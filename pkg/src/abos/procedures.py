"""Decision rules and their exact error arithmetic.

Two kinds of rules act on the magnitudes z_i = |X_i|/sigma0: fixed rules
that reject where z_i >= omega, and the step-up rule that works on the
p-values p_i = s * (1 - D(z_i)).  The step-up rule is implemented twice
over the same sorted state: once for a single level and once as a sweep
that serves a whole grid of levels from one sort, which is what the
simulation layer runs per replicate.

Realized errors are counted against the truth vector; the exact type I/II
probabilities and the Bayes risk of fixed rules come in closed form from
the tail model, so Monte Carlo output can be checked against arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .distributions import Sides, TailModel, cdf, survival
from .regime import TestingProblem
from .thresholds import ThresholdResult, ThresholdStatus


@dataclass(frozen=True)
class DecisionSummary:
    """Realized outcome of one rule on one dataset.

    ``realized_loss`` is delta0 * false_rejections + delta_a * missed_signals.
    ``k_hat`` is the step-up index (0 when nothing is rejected; 0 for fixed
    rules, which have no such index).
    """

    rejections: int
    false_rejections: int
    missed_signals: int
    realized_loss: float
    k_hat: int = 0


def pvalues(model: TailModel, z) -> np.ndarray:
    """p_i = s * (1 - D(z_i)) with s = 2 two-sided, 1 one-sided.

    ``z`` holds magnitudes |X_i|/sigma0, so two-sided members fold both
    tails into the survival factor; p is 1.0 exactly at z = 0.
    """
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("z must be nonnegative magnitudes")
    s = 2.0 if model.sides is Sides.TWO_SIDED else 1.0
    return s * survival(model, arr)


def decide_fixed(z, omega: ThresholdResult) -> np.ndarray:
    """Reject where z >= omega; boundary statuses reject nothing/everything."""
    arr = np.asarray(z, dtype=float)
    if omega.status is ThresholdStatus.REJECT_NONE:
        return np.zeros(arr.shape, dtype=bool)
    if omega.status is ThresholdStatus.REJECT_ALL:
        return np.ones(arr.shape, dtype=bool)
    return arr >= omega.omega


def error_counts(decisions, truth, delta0: float, delta_a: float) -> DecisionSummary:
    """Count V, T and the realized loss of a decision vector against truth."""
    d = np.asarray(decisions, dtype=bool)
    t = np.asarray(truth, dtype=bool)
    if d.shape != t.shape:
        raise ValueError("decisions and truth differ in shape")
    rejections = int(np.count_nonzero(d))
    v = int(np.count_nonzero(d & ~t))
    missed = int(np.count_nonzero(t & ~d))
    return DecisionSummary(
        rejections=rejections,
        false_rejections=v,
        missed_signals=missed,
        realized_loss=delta0 * v + delta_a * missed,
        k_hat=0,
    )


class _StepUpState(NamedTuple):
    """One sorted pass over the p-values, reusable across levels."""

    ps: np.ndarray  # sorted p-values
    suffix: np.ndarray  # suffix minima of m * p_(k) / k; nondecreasing
    z_min: np.ndarray | None  # prefix minima of z along the sort
    null_cum: np.ndarray | None  # running null count along the sort
    n_signals: int


def _step_up_state(pvals, z, truth) -> _StepUpState:
    p = np.asarray(pvals, dtype=float)
    m = p.size
    order = np.argsort(p, kind="stable")
    ps = p[order]
    # r_k = m p_(k) / k; the step-up index is the largest k whose suffix
    # minimum is still <= alpha, and those minima are nondecreasing in k,
    # so every level reduces to one binary search
    ratios = ps * (m / np.arange(1.0, m + 1.0))
    suffix = np.minimum.accumulate(ratios[::-1])[::-1]
    z_min = None
    if z is not None:
        z_min = np.minimum.accumulate(np.asarray(z, dtype=float)[order])
    null_cum = None
    n_signals = 0
    if truth is not None:
        t = np.asarray(truth, dtype=bool)
        if t.shape != p.shape:
            raise ValueError("pvals and truth differ in shape")
        null_cum = np.cumsum(~t[order])
        n_signals = int(np.count_nonzero(t))
    return _StepUpState(ps, suffix, z_min, null_cum, n_signals)


def _evaluate_level(
    state: _StepUpState, alpha: float, delta0: float, delta_a: float
) -> tuple[DecisionSummary, float, float]:
    """(summary, omega_bh, cutoff) at one level from prepared state.

    cutoff is the rejection boundary on the p-value scale, -inf when
    nothing is rejected; omega_bh is nan when z was not supplied.
    """
    k_hat = int(np.searchsorted(state.suffix, alpha, side="right"))
    if k_hat == 0:
        missed = state.n_signals if state.null_cum is not None else 0
        summary = DecisionSummary(0, 0, missed, delta_a * missed, 0)
        return summary, math.inf, -math.inf
    cutoff = float(state.ps[k_hat - 1])
    # ties cannot straddle the boundary (an equal p-value at k_hat + 1
    # would itself satisfy the step-up inequality), so this count equals
    # k_hat; searchsorted keeps it honest anyway
    rejections = int(np.searchsorted(state.ps, cutoff, side="right"))
    v = missed = 0
    loss = 0.0
    if state.null_cum is not None:
        v = int(state.null_cum[rejections - 1])
        missed = state.n_signals - (rejections - v)
        loss = delta0 * v + delta_a * missed
    omega = float(state.z_min[rejections - 1]) if state.z_min is not None else math.nan
    summary = DecisionSummary(rejections, v, missed, loss, k_hat)
    return summary, omega, cutoff


def bh_decide(
    pvals,
    alpha: float,
    z=None,
    truth=None,
    delta0: float = 1.0,
    delta_a: float = 1.0,
) -> tuple[np.ndarray, DecisionSummary, ThresholdResult | None]:
    """Step-up rule: k_hat = max{k : p_(k) <= alpha k / m}, reject p <= p_(k_hat).

    Returns (decisions, summary, omega_bh).  omega_bh is the realized
    magnitude threshold -- the smallest rejected z, packaged as an interior
    ThresholdResult so it can drive decide_fixed; with no rejection it is a
    reject-none result with omega = +inf, and it is None when z was not
    supplied (the threshold lives on the z scale).  Error fields of the
    summary are zero unless truth is supplied.
    """
    state = _step_up_state(pvals, z, truth)
    summary, omega, cutoff = _evaluate_level(state, alpha, delta0, delta_a)
    decisions = np.asarray(pvals, dtype=float) <= cutoff
    if summary.k_hat == 0:
        result: ThresholdResult | None = ThresholdResult(
            math.inf, 0.0, ThresholdStatus.REJECT_NONE
        )
    elif z is None:
        result = None
    else:
        result = ThresholdResult(omega, 0.0, ThresholdStatus.INTERIOR)
    return decisions, summary, result


def bh_sweep(
    pvals,
    alphas: Sequence[float],
    z=None,
    truth=None,
    delta0: float = 1.0,
    delta_a: float = 1.0,
) -> list[tuple[DecisionSummary, float]]:
    """Step-up outcomes for a whole grid of levels from a single sort.

    Returns one (summary, omega_bh) pair per level, identical to what
    bh_decide reports there; omega_bh is +inf with no rejection and nan
    when z is not supplied.
    """
    state = _step_up_state(pvals, z, truth)
    out = []
    for alpha in alphas:
        summary, omega, _ = _evaluate_level(state, float(alpha), delta0, delta_a)
        out.append((summary, omega))
    return out


def exact_error_probs(
    model: TailModel, problem: TestingProblem, omega: float
) -> tuple[float, float]:
    """Exact (t1, t2) of the fixed rule at threshold omega.

    t1 is the null rejection probability s(1 - D(omega)); t2 is the signal
    miss probability, s D(omega / sqrt(theta)) - (s - 1).
    """
    if not (omega >= 0.0 and math.isfinite(omega)):
        raise ValueError("omega must be finite and nonnegative")
    s = 2.0 if model.sides is Sides.TWO_SIDED else 1.0
    t1 = s * float(survival(model, omega))
    t2 = s * float(cdf(model, omega / math.sqrt(problem.theta))) - (s - 1.0)
    return t1, t2


def exact_fixed_risk(problem: TestingProblem, t1: float, t2: float) -> float:
    """Bayes risk m p delta_a (v t1 + t2) of an i.i.d. fixed rule.

    Evaluated in the expanded form m(1-p) delta0 t1 + m p delta_a t2 (the
    same quantity with the p*v product cancelled) so that p = 0 stays
    finite.
    """
    if not (0.0 <= t1 <= 1.0 and 0.0 <= t2 <= 1.0):
        raise ValueError("t1 and t2 must lie in [0, 1]")
    m = problem.m
    return m * (1.0 - problem.p) * problem.delta0 * t1 + m * problem.p * problem.delta_a * t2
