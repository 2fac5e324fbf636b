"""Polynomial-tailed scale families: Student's t, Pareto (Lomax), inverse gamma.

All three members share two structural properties that the threshold solvers
and decision procedures depend on:

* a polynomial right tail, ``density(x) * x**(gamma + 1) -> c_d`` and
  equivalently ``x**gamma * survival(x) -> c_d / gamma``;
* a strictly increasing scale likelihood ratio, so every likelihood-ratio
  test reduces to a cutoff on ``|x|``.

Densities here are standardized (unit scale).  Scale enters only through
``sample`` and through the callers' own ``z = |x| / sigma0`` reductions.
Survival probabilities get a dedicated implementation per family instead of
``1 - cdf`` so that far-tail values keep full relative precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc


class Family(enum.Enum):
    STUDENT_T = "student-t"
    PARETO = "pareto"
    INVERSE_GAMMA = "inverse-gamma"


class Sides(enum.Enum):
    TWO_SIDED = "two-sided"
    ONE_SIDED = "one-sided"


@dataclass(frozen=True)
class TailModel:
    """One family member, frozen after construction.

    ``c_d`` is the tail constant ``lim density(x) * x**(gamma + 1)``; it is
    derived from ``kind`` and ``gamma``, so build models through
    :func:`make_model` (or the per-family helpers) rather than directly.
    """

    kind: Family
    gamma: float
    c_d: float
    sides: Sides

    def __post_init__(self) -> None:
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be positive and finite")


def _tail_constant(kind: Family, gamma: float) -> float:
    if kind is Family.STUDENT_T:
        return math.exp(
            0.5 * gamma * math.log(gamma)
            + math.lgamma(0.5 * (gamma + 1.0))
            - 0.5 * math.log(math.pi)
            - math.lgamma(0.5 * gamma)
        )
    if kind is Family.PARETO:
        return gamma
    return math.exp(-math.lgamma(gamma))


def make_model(kind: Family | str, gamma: float) -> TailModel:
    """Construct a family member; ``kind`` accepts the enum or its value."""
    if isinstance(kind, str):
        kind = Family(kind)
    gamma = float(gamma)
    sides = Sides.TWO_SIDED if kind is Family.STUDENT_T else Sides.ONE_SIDED
    return TailModel(kind, gamma, _tail_constant(kind, gamma), sides)


def student_t(gamma: float) -> TailModel:
    return make_model(Family.STUDENT_T, gamma)


def pareto(gamma: float) -> TailModel:
    return make_model(Family.PARETO, gamma)


def inverse_gamma(gamma: float) -> TailModel:
    return make_model(Family.INVERSE_GAMMA, gamma)


def _wrap(x_in, out):
    return float(out) if np.ndim(x_in) == 0 else out


def _check_support(model: TailModel, x: np.ndarray) -> None:
    if model.sides is Sides.ONE_SIDED and np.any(x < 0.0):
        raise ValueError(f"{model.kind.value} has nonnegative support")


def density(model: TailModel, x) -> float | np.ndarray:
    """Standardized density d(x).  One-sided members reject x < 0."""
    arr = np.asarray(x, dtype=float)
    _check_support(model, arr)
    g = model.gamma
    if model.kind is Family.STUDENT_T:
        out = model.c_d * (arr * arr + g) ** (-0.5 * (g + 1.0))
    elif model.kind is Family.PARETO:
        out = model.c_d * np.exp(-(g + 1.0) * np.log1p(arr))
    else:
        # exp-log form avoids inf * 0 at the endpoints of the support
        with np.errstate(divide="ignore", over="ignore"):
            safe = np.where(arr > 0.0, arr, 1.0)
            out = np.where(
                arr > 0.0,
                model.c_d * np.exp(-(g + 1.0) * np.log(safe) - 1.0 / safe),
                0.0,
            )
    return _wrap(x, out)


def _log_x2_plus(ax: np.ndarray, g: float) -> np.ndarray:
    # log(x^2 + g) without overflow in x^2 for |x| beyond 1e154
    big = ax > 1e150
    safe = np.where(big, 1.0, ax)
    return np.where(big, 2.0 * np.log(np.where(big, ax, 1.0)), np.log(safe * safe + g))


def log_density(model: TailModel, x) -> float | np.ndarray:
    """log d(x); finite wherever d(x) > 0, -inf on the boundary."""
    arr = np.asarray(x, dtype=float)
    _check_support(model, arr)
    g = model.gamma
    if model.kind is Family.STUDENT_T:
        out = math.log(model.c_d) - 0.5 * (g + 1.0) * _log_x2_plus(np.abs(arr), g)
    elif model.kind is Family.PARETO:
        out = math.log(model.c_d) - (g + 1.0) * np.log1p(arr)
    else:
        with np.errstate(divide="ignore"):
            safe = np.where(arr > 0.0, arr, 1.0)
            out = np.where(
                arr > 0.0,
                math.log(model.c_d) - (g + 1.0) * np.log(safe) - 1.0 / safe,
                -np.inf,
            )
    return _wrap(x, out)


def survival(model: TailModel, x) -> float | np.ndarray:
    """Upper tail probability 1 - D(x), computed without cancellation.

    In the far tail this is the quantity every threshold equation consumes,
    so each family gets a direct formula: arctan / rationalized closed forms
    for Student's t with gamma in {1, 2}, the regularized incomplete beta
    otherwise, ``(1 + x)**-gamma`` for Pareto, and the regularized lower
    incomplete gamma of 1/x for the inverse gamma.
    """
    arr = np.asarray(x, dtype=float)
    g = model.gamma
    if model.kind is Family.STUDENT_T:
        ax = np.abs(arr)
        if g == 1.0:
            tail = np.arctan2(1.0, ax) / math.pi
        elif g == 2.0:
            root = np.sqrt(2.0 + ax * ax)
            tail = 1.0 / (root * (root + ax))
        else:
            tail = 0.5 * sc.betainc(0.5 * g, 0.5, g / (g + ax * ax))
        out = np.where(arr >= 0.0, tail, 1.0 - tail)
    elif model.kind is Family.PARETO:
        pos = np.maximum(arr, 0.0)
        out = np.where(arr > 0.0, np.exp(-g * np.log1p(pos)), 1.0)
    else:
        safe = np.where(arr > 0.0, arr, 1.0)
        out = np.where(arr > 0.0, sc.gammainc(g, 1.0 / safe), 1.0)
    return _wrap(x, out)


def cdf(model: TailModel, x) -> float | np.ndarray:
    """D(x).  Values below the support clamp to 0."""
    arr = np.asarray(x, dtype=float)
    g = model.gamma
    if model.kind is Family.STUDENT_T:
        # symmetry: D(x) = survival(-x), keeps the left tail fully precise
        return _wrap(x, np.asarray(survival(model, -arr)))
    if model.kind is Family.PARETO:
        pos = np.maximum(arr, 0.0)
        out = np.where(arr > 0.0, -np.expm1(-g * np.log1p(pos)), 0.0)
    else:
        safe = np.where(arr > 0.0, arr, 1.0)
        out = np.where(arr > 0.0, sc.gammaincc(g, 1.0 / safe), 0.0)
    return _wrap(x, out)


def log_survival(model: TailModel, x: float) -> float:
    """log(1 - D(x)) for scalar x, with a tail fallback past underflow."""
    s = survival(model, x)
    if s > 0.0:
        return math.log(s)
    # only reachable for astronomically large x; use the polynomial limit
    return math.log(model.c_d / model.gamma) - model.gamma * math.log(x)


def quantile(model: TailModel, q) -> float | np.ndarray:
    """Inverse cdf.  Pareto inverts in closed form, the rest bisect."""
    arr = np.asarray(q, dtype=float)
    if np.any((arr <= 0.0) | (arr >= 1.0)):
        raise ValueError("quantile level must lie strictly inside (0, 1)")
    if model.kind is Family.PARETO:
        out = np.expm1(-np.log1p(-arr) / model.gamma)
        return _wrap(q, out)
    out = np.array([_quantile_scalar(model, float(v)) for v in np.atleast_1d(arr)])
    return _wrap(q, out.reshape(arr.shape) if arr.ndim else out[0])


def _quantile_scalar(model: TailModel, q: float) -> float:
    from . import rootfind

    if model.kind is Family.STUDENT_T:
        if q == 0.5:
            return 0.0
        if q < 0.5:
            return -_quantile_scalar(model, 1.0 - q)
        target = 1.0 - q

        def f(xx: float) -> float:
            return target - survival(model, xx)  # increasing in xx

        hi = 1.0
        while survival(model, hi) > target:
            hi *= 2.0
        return rootfind.bisect_increasing(f, 0.0, hi)

    def f(xx: float) -> float:
        return cdf(model, xx) - q

    lo, hi = 1.0, 1.0
    while cdf(model, lo) > q:
        lo *= 0.5
    while cdf(model, hi) < q:
        hi *= 2.0
    return rootfind.bisect_increasing(f, lo, hi)


def sample(model: TailModel, scale: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws with cdf D(x / scale), deterministic in the rng state."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    if model.kind is Family.STUDENT_T:
        return scale * rng.standard_t(model.gamma, size=n)
    if model.kind is Family.PARETO:
        return scale * rng.pareto(model.gamma, size=n)
    # reciprocal of a unit-scale gamma draw
    return scale / rng.gamma(model.gamma, 1.0, size=n)


def scale_likelihood_ratio(model: TailModel, x, theta: float) -> float | np.ndarray:
    """Marginal likelihood ratio of variance-ratio theta against unit scale.

    Returns ``theta**-0.5 * d(x * theta**-0.5) / d(x)``, the statistic whose
    monotonicity in |x| turns the optimal rule into a threshold rule.  It
    climbs to ``theta**(gamma/2)`` as ``|x| -> inf``.
    """
    if not theta > 1.0:
        raise ValueError("theta must exceed 1")
    arr = np.asarray(x, dtype=float)
    _check_support(model, arr)
    srt = theta**-0.5
    out = np.exp(
        math.log(srt)
        + np.asarray(log_density(model, arr * srt))
        - np.asarray(log_density(model, arr))
    )
    return _wrap(x, out)


def lr_small_x_limit(model: TailModel, theta: float) -> float:
    """Infimum of the scale likelihood ratio over the support.

    ``theta**-0.5`` when d is positive at the origin (Student's t, Pareto);
    0 for the inverse gamma, whose density vanishes at 0 faster than any
    power.  Threshold solvers use this to decide when a reject-all rule wins.
    """
    if not theta > 1.0:
        raise ValueError("theta must exceed 1")
    if model.kind is Family.INVERSE_GAMMA:
        return 0.0
    return theta**-0.5


@dataclass(frozen=True)
class TailDiagnostics:
    """Grid evaluation of the three tail functionals.

    g = density(x) * x**(gamma+1)      -> c_d
    h = x**gamma * survival(x)         -> c_d / gamma
    lr_ratio = survival(x/theta0) / survival(x)  -> theta0**gamma

    All three are strictly increasing on (0, inf) for every family member.
    """

    x: np.ndarray
    g: np.ndarray
    h: np.ndarray
    lr_ratio: np.ndarray
    theta0: float


def tail_diagnostics(model: TailModel, grid, theta0: float = 2.0) -> TailDiagnostics:
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if np.any(x <= 0.0) or np.any(np.diff(x) <= 0.0):
        raise ValueError("grid must be positive and strictly increasing")
    if not theta0 > 1.0:
        raise ValueError("theta0 must exceed 1")
    g = model.gamma
    surv = np.asarray(survival(model, x))
    diag_g = np.asarray(density(model, x)) * x ** (g + 1.0)
    diag_h = x**g * surv
    lr = np.asarray(survival(model, x / theta0)) / surv
    return TailDiagnostics(x=x, g=diag_g, h=diag_h, lr_ratio=lr, theta0=theta0)
