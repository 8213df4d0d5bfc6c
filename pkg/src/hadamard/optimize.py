"""Grid search plus golden-section refinement on an interval."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from hadamard.quad import Interval

DEFAULT_GRID = 257
DEFAULT_REFINE_TOL = 1e-10
_INV_PHI = (math.sqrt(5) - 1) / 2
# grid spread (relative) below which the profile is treated as constant
FLAT_REL = 16 * np.finfo(float).eps


class OptimizationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OptimumResult:
    x_star: float
    value: float
    evaluations: int
    refined: bool
    flat: bool = False


def _safe(phi: Callable[[float], float], x: float) -> float:
    try:
        v = float(phi(x))
    except (ArithmeticError, ValueError):
        return math.nan
    return v if math.isfinite(v) else math.nan


def minimize_scalar(
    phi: Callable[[float], float],
    iv: Interval,
    n_grid: int = DEFAULT_GRID,
    refine_tol: float = DEFAULT_REFINE_TOL,
) -> OptimumResult:
    """Minimize ``phi`` over ``iv``.

    ``phi`` is sampled at ``n_grid`` equispaced points (endpoints included);
    faulting samples are skipped.  The lowest sample, first in x on ties,
    brackets a golden-section search down to ``refine_tol * (b - a)``.  The
    refined point replaces the grid point only when strictly better.  A
    profile that is constant up to rounding is reported as ``flat`` without
    refinement.
    """
    if n_grid < 3:
        raise ValueError("n_grid must be at least 3")
    xs = iv.linspace(n_grid)
    values = np.array([_safe(phi, float(x)) for x in xs])
    evaluations = n_grid
    ok = ~np.isnan(values)
    if not ok.any():
        raise OptimizationError("objective faults at every grid point")
    masked = np.where(ok, values, np.inf)
    i = int(np.argmin(masked))
    best_x, best_v = float(xs[i]), float(masked[i])
    finite = values[ok]
    spread = float(finite.max() - finite.min())
    if spread <= FLAT_REL * float(np.abs(finite).max()):
        # constant up to rounding: no basin worth refining
        return OptimumResult(best_x, best_v, evaluations, False, flat=True)

    lo = float(xs[max(i - 1, 0)])
    hi = float(xs[min(i + 1, n_grid - 1)])
    width_tol = refine_tol * iv.width
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = _safe(phi, c), _safe(phi, d)
    evaluations += 2
    while hi - lo > width_tol:
        # a faulting probe is treated as +inf so the bracket moves away from it
        if (fc if not math.isnan(fc) else math.inf) <= (fd if not math.isnan(fd) else math.inf):
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = _safe(phi, c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = _safe(phi, d)
        evaluations += 1

    refined = False
    for x, v in ((c, fc), (d, fd)):
        if not math.isnan(v) and v < best_v:
            best_x, best_v, refined = x, v, True
    return OptimumResult(best_x, best_v, evaluations, refined)


def maximize_scalar(
    phi: Callable[[float], float],
    iv: Interval,
    n_grid: int = DEFAULT_GRID,
    refine_tol: float = DEFAULT_REFINE_TOL,
) -> OptimumResult:
    res = minimize_scalar(lambda x: -phi(x), iv, n_grid, refine_tol)
    return OptimumResult(res.x_star, -res.value, res.evaluations, res.refined, res.flat)
