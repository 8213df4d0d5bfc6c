"""Two-argument means of positive reals."""

from __future__ import annotations

import math
import sys

# below this relative gap the logarithmic mean is replaced by the midpoint
NEAR_EQUAL_REL = 1e-8
_TINY = sys.float_info.min
_HUGE = sys.float_info.max


class MeanDomainError(ValueError):
    pass


def _check(p: float, q: float) -> tuple[float, float]:
    p, q = float(p), float(q)
    if not (math.isfinite(p) and math.isfinite(q)) or p <= 0 or q <= 0:
        raise MeanDomainError(f"means need finite positive arguments, got ({p!r}, {q!r})")
    return p, q


def log_mean(p: float, q: float) -> float:
    """Logarithmic mean ``(q - p) / (ln q - ln p)`` with ``L(p, p) = p``.

    Arguments are ordered first so ``log_mean(p, q) == log_mean(q, p)``
    exactly.  The log difference is taken as ``log1p((q - p) / p)``, which
    keeps full relative accuracy when ``p`` and ``q`` are close.
    """
    p, q = _check(p, q)
    if p > q:
        p, q = q, p
    if p == q:
        return p
    diff = q - p
    if diff <= NEAR_EQUAL_REL * q:
        # error of the midpoint is O((diff/p)^2), far below one ulp here
        return p + diff / 2
    return diff / math.log1p(diff / p)


def arithmetic_mean(p: float, q: float) -> float:
    p, q = _check(p, q)
    if p > q:
        p, q = q, p
    return p + (q - p) / 2


def geometric_mean(p: float, q: float) -> float:
    p, q = _check(p, q)
    if p == q:
        return p
    prod = p * q
    if _TINY <= prod <= _HUGE:
        return math.sqrt(prod)
    # product would lose precision or overflow
    return math.sqrt(p) * math.sqrt(q)
