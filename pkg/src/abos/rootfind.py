"""Bracketed bisection for monotone scalar equations.

Every nonlinear solve in this package (threshold equations, quantile
inversion, difficulty-constant inversion) goes through these two helpers.
Plain bisection is slower than derivative-based methods but cannot diverge,
and every target function here is strictly monotone on its bracket.
"""

from __future__ import annotations

from typing import Callable

_MAX_EXPANSIONS = 2000
_MAX_BISECTIONS = 400


class BracketError(ValueError):
    """No sign change found inside the representable expansion range."""


def expand_bracket(
    fn: Callable[[float], float],
    start: float = 1.0,
    grow: float = 2.0,
    lo_floor: float = 0.0,
    hi_ceil: float = 1e300,
) -> tuple[float, float]:
    """Geometric bracket expansion for an increasing function crossing zero.

    Starting from ``start``, steps outward by factor ``grow`` until
    ``fn(lo) <= 0 <= fn(hi)``.  ``fn`` must be nondecreasing between the
    returned endpoints.
    """
    if not start > 0:
        raise ValueError("bracket start must be positive")
    f0 = fn(start)
    if f0 == 0.0:
        return start, start
    if f0 > 0.0:
        hi = start
        lo = start / grow
        for _ in range(_MAX_EXPANSIONS):
            if fn(lo) <= 0.0:
                return lo, hi
            hi = lo
            lo /= grow
            if lo <= lo_floor:
                # lo_floor = 0 keeps a left-open bracket usable: the
                # function is evaluated at 0 only if the caller allows it.
                if lo_floor == 0.0 and fn(0.0) <= 0.0:
                    return 0.0, hi
                raise BracketError("no sign change above the lower cap")
    else:
        lo = start
        hi = start * grow
        for _ in range(_MAX_EXPANSIONS):
            if fn(hi) >= 0.0:
                return lo, hi
            lo = hi
            hi *= grow
            if hi >= hi_ceil:
                raise BracketError("no sign change below the upper cap")
    raise BracketError("bracket expansion exhausted")


def bisect_increasing(fn: Callable[[float], float], lo: float, hi: float) -> float:
    """Bisect an increasing ``fn`` with ``fn(lo) <= 0 <= fn(hi)``.

    Runs until the midpoint collides with an endpoint, i.e. to the last
    representable float, so callers get full double precision regardless of
    the magnitude of the root.
    """
    if lo > hi:
        raise ValueError("empty bracket")
    if lo == hi:
        return lo
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            return mid if lo < mid else hi
        f = fn(mid)
        if f == 0.0:
            return mid
        if f < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
