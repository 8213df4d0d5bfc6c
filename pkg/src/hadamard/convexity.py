"""Grid-based certification of convexity-type class membership.

A certificate only says no violation was found at the recorded grid
resolution; it is not a proof.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from hadamard.expr import Expr, as_expr, evaluate, evaluate_array
from hadamard.quad import Interval

KINDS = ("convex", "log_convex", "log_concave", "m_convex", "alpha_m_convex")
LOG_KINDS = ("log_convex", "log_concave")
DEFAULT_GRID = (41, 21)
CERTIFY_TOL = 1e-9

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ClassSpec:
    kind: str
    m: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown class {self.kind!r}; expected one of {', '.join(KINDS)}")
        needs_m = self.kind in ("m_convex", "alpha_m_convex")
        needs_alpha = self.kind == "alpha_m_convex"
        if needs_m != (self.m is not None):
            raise ValueError(f"class {self.kind} {'requires' if needs_m else 'does not take'} m")
        if needs_alpha != (self.alpha is not None):
            raise ValueError(f"class {self.kind} {'requires' if needs_alpha else 'does not take'} alpha")
        for name in ("m", "alpha"):
            v = getattr(self, name)
            if v is not None:
                v = float(v)
                if not 0 < v <= 1:
                    raise ValueError(f"{name} must lie in (0, 1], got {v}")
                object.__setattr__(self, name, v)

    @classmethod
    def convex(cls):
        return cls("convex")

    @classmethod
    def log_convex(cls):
        return cls("log_convex")

    @classmethod
    def log_concave(cls):
        return cls("log_concave")

    @classmethod
    def m_convex(cls, m: float):
        return cls("m_convex", m=m)

    @classmethod
    def alpha_m_convex(cls, alpha: float, m: float):
        return cls("alpha_m_convex", m=m, alpha=alpha)

    def label(self) -> str:
        if self.kind == "m_convex":
            return f"m_convex(m={self.m!r})"
        if self.kind == "alpha_m_convex":
            return f"alpha_m_convex(alpha={self.alpha!r}, m={self.m!r})"
        return self.kind

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "alpha": self.alpha}


def _json_float(v):
    if v is None or not math.isfinite(v):
        return None
    return v


@dataclass(frozen=True)
class ConvexityCertificate:
    spec: ClassSpec
    domain: Interval
    grid: tuple[int, int]
    worst_violation: float
    verdict: str
    counterexample: Optional[tuple[float, float, float]] = None
    in_K_class: Optional[bool] = None
    checked_range: tuple[float, float] = (math.nan, math.nan)
    certify_tol: float = CERTIFY_TOL
    fault: Optional[str] = None

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "type": "convexity",
            "class": self.spec.to_dict(),
            "domain": [self.domain.a, self.domain.b],
            "checked_range": [_json_float(v) for v in self.checked_range],
            "grid": list(self.grid),
            "certify_tol": self.certify_tol,
            "worst_violation": _json_float(self.worst_violation),
            "verdict": self.verdict,
            "counterexample": list(self.counterexample) if self.counterexample else None,
            "in_K_class": self.in_K_class,
            "fault": self.fault,
        }


@dataclass(frozen=True)
class MonotonicityCertificate:
    domain: Interval
    n: int
    worst_violation: float
    verdict: str
    direction: str = "non_increasing"
    counterexample: Optional[tuple[float, float]] = None
    certify_tol: float = CERTIFY_TOL
    fault: Optional[str] = None

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "type": "monotonicity",
            "direction": self.direction,
            "domain": [self.domain.a, self.domain.b],
            "n": self.n,
            "certify_tol": self.certify_tol,
            "worst_violation": _json_float(self.worst_violation),
            "verdict": self.verdict,
            "counterexample": list(self.counterexample) if self.counterexample else None,
            "fault": self.fault,
        }


@dataclass(frozen=True)
class SignCertificate:
    """Sampled check that ``f >= 0`` (codomain hypothesis of the m-convex bounds)."""

    domain: Interval
    n: int
    worst_violation: float
    verdict: str
    counterexample: Optional[float] = None
    certify_tol: float = CERTIFY_TOL
    fault: Optional[str] = None

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "type": "nonnegativity",
            "domain": [self.domain.a, self.domain.b],
            "n": self.n,
            "certify_tol": self.certify_tol,
            "worst_violation": _json_float(self.worst_violation),
            "verdict": self.verdict,
            "counterexample": self.counterexample,
            "fault": self.fault,
        }


def _weights(spec: ClassSpec):
    m = 1.0 if spec.m is None else spec.m
    alpha = 1.0 if spec.alpha is None else spec.alpha
    return m, alpha


def violation_at(f: Expr | str, spec: ClassSpec, x: float, y: float, t: float) -> float:
    """Slack ``LHS - RHS`` of the defining inequality at one triple.

    Uses scalar evaluation, independent of the vectorized grid path.  Log
    classes are compared in log space; a non-positive value there counts as
    an infinite violation.  Returns NaN on any other domain fault.
    """
    f = as_expr(f)
    m, alpha = _weights(spec)
    z = t * x + m * (1 - t) * y
    fz, fx, fy = evaluate(f, z), evaluate(f, x), evaluate(f, y)
    if spec.kind in LOG_KINDS:
        vals = [o.value for o in (fz, fx, fy) if o.ok]
        if any(v <= 0 for v in vals):
            return math.inf
        if len(vals) < 3:
            return math.nan
        diff = math.log(fz.value) - (t * math.log(fx.value) + (1 - t) * math.log(fy.value))
        return diff if spec.kind == "log_convex" else -diff
    if not (fz.ok and fx.ok and fy.ok):
        return math.nan
    w = t**alpha
    return fz.value - (w * fx.value + m * (1 - w) * fy.value)


def _k_class(f: Expr, spec: ClassSpec) -> Optional[bool]:
    if spec.kind not in ("m_convex", "alpha_m_convex"):
        return None
    out = evaluate(f, 0.0)
    return bool(out.value <= 0) if out.ok else None


def certify(
    f: Expr | str,
    spec: ClassSpec,
    domain: Interval,
    grid: tuple[int, int] = DEFAULT_GRID,
    certify_tol: float = CERTIFY_TOL,
) -> ConvexityCertificate:
    """Check the class-defining inequality on an ``n_xy x n_xy x n_t`` grid.

    Samples include the domain endpoints and ``t in {0, 1}``.  For the
    m-classes the combined point ``t x + m (1 - t) y`` may leave the domain
    (down to ``m a``); ``f`` is evaluated wherever it lands and the range is
    recorded in ``checked_range``.
    """
    return _certify(as_expr(f), spec, domain, (int(grid[0]), int(grid[1])), float(certify_tol))


# certificates are immutable, and fuzzing re-certifies the same draws
@functools.lru_cache(maxsize=512)
def _certify(f: Expr, spec: ClassSpec, domain: Interval, grid: tuple[int, int], certify_tol: float):
    n_xy, n_t = grid
    if n_xy < 2 or n_t < 2:
        raise ValueError("grid needs at least two points per axis")
    m, alpha = _weights(spec)
    xs = domain.linspace(n_xy)
    ts = np.linspace(0.0, 1.0, n_t)
    X = xs[:, None, None]
    Y = xs[None, :, None]
    T = ts[None, None, :]
    Z = T * X + m * (1 - T) * Y
    fx = evaluate_array(f, xs)
    fz = evaluate_array(f, Z)
    checked = (float(min(Z.min(), xs[0])), float(max(Z.max(), xs[-1])))
    common = dict(spec=spec, domain=domain, grid=(n_xy, n_t), checked_range=checked, certify_tol=certify_tol)
    in_k = _k_class(f, spec)

    if spec.kind in LOG_KINDS:
        # non-positive values break the hypothesis outright
        nonpos_z = np.isfinite(fz) & (fz <= 0)
        nonpos_x = np.isfinite(fx) & (fx <= 0)
        if nonpos_x.any():
            i = int(np.argmax(nonpos_x))
            return ConvexityCertificate(
                worst_violation=math.inf, verdict=REFUTED, counterexample=(float(xs[i]), float(xs[i]), 1.0),
                fault=f"non-positive value {float(fx[i])!r} at x = {float(xs[i])!r}", **common,
            )
        if nonpos_z.any():
            i, j, k = np.unravel_index(int(np.argmax(nonpos_z)), Z.shape)
            return ConvexityCertificate(
                worst_violation=math.inf, verdict=REFUTED,
                counterexample=(float(xs[i]), float(xs[j]), float(ts[k])),
                fault=f"non-positive value {float(fz[i, j, k])!r} at x = {float(Z[i, j, k])!r}", **common,
            )

    bad_x = ~np.isfinite(fx)
    bad_z = ~np.isfinite(fz)
    if bad_x.any() or bad_z.any():
        where = float(xs[bad_x][0]) if bad_x.any() else float(Z[bad_z][0])
        return ConvexityCertificate(
            worst_violation=math.nan, verdict=INCONCLUSIVE, in_K_class=in_k,
            fault=f"domain fault at x = {where!r}", **common,
        )

    FX = fx[:, None, None]
    FY = fx[None, :, None]
    with np.errstate(all="ignore"):
        if spec.kind in LOG_KINDS:
            lx, ly, lz = np.log(FX), np.log(FY), np.log(fz)
            slack = lz - (T * lx + (1 - T) * ly)
            if spec.kind == "log_concave":
                slack = -slack
        else:
            w = T**alpha
            slack = fz - (w * FX + m * (1 - w) * FY)
    # first maximal index in C order keeps the counterexample deterministic
    flat = int(np.argmax(slack))
    worst = float(slack.ravel()[flat])
    i, j, k = np.unravel_index(flat, slack.shape)
    triple = (float(xs[i]), float(xs[j]), float(ts[k]))
    if worst > certify_tol:
        return ConvexityCertificate(
            worst_violation=worst, verdict=REFUTED, counterexample=triple, in_K_class=in_k, **common
        )
    return ConvexityCertificate(worst_violation=worst, verdict=CERTIFIED, in_K_class=in_k, **common)


def certify_monotone(
    f: Expr | str, domain: Interval, n: int = 101, certify_tol: float = CERTIFY_TOL
) -> MonotonicityCertificate:
    """Check ``f(x_i) >= f(x_{i+1}) - tol`` over ``n`` equispaced samples."""
    f = as_expr(f)
    if n < 2:
        raise ValueError("need at least two samples")
    xs = domain.linspace(n)
    ys = evaluate_array(f, xs)
    bad = ~np.isfinite(ys)
    if bad.any():
        return MonotonicityCertificate(
            domain=domain, n=n, worst_violation=math.nan, verdict=INCONCLUSIVE,
            certify_tol=certify_tol, fault=f"domain fault at x = {float(xs[bad][0])!r}",
        )
    rises = ys[1:] - ys[:-1]
    i = int(np.argmax(rises))
    worst = float(rises[i])
    if worst > certify_tol:
        return MonotonicityCertificate(
            domain=domain, n=n, worst_violation=worst, verdict=REFUTED,
            counterexample=(float(xs[i]), float(xs[i + 1])), certify_tol=certify_tol,
        )
    return MonotonicityCertificate(domain=domain, n=n, worst_violation=worst, verdict=CERTIFIED, certify_tol=certify_tol)


def certify_nonnegative(
    f: Expr | str, domain: Interval, n: int = 101, certify_tol: float = CERTIFY_TOL
) -> SignCertificate:
    f = as_expr(f)
    xs = domain.linspace(n)
    ys = evaluate_array(f, xs)
    bad = ~np.isfinite(ys)
    if bad.any():
        return SignCertificate(
            domain=domain, n=n, worst_violation=math.nan, verdict=INCONCLUSIVE,
            certify_tol=certify_tol, fault=f"domain fault at x = {float(xs[bad][0])!r}",
        )
    i = int(np.argmin(ys))
    worst = float(-ys[i])
    if worst > certify_tol:
        return SignCertificate(
            domain=domain, n=n, worst_violation=worst, verdict=REFUTED,
            counterexample=float(xs[i]), certify_tol=certify_tol,
        )
    return SignCertificate(domain=domain, n=n, worst_violation=worst, verdict=CERTIFIED, certify_tol=certify_tol)
