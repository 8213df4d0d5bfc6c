"""Closed-form Hadamard-type bounds, evaluated and checked against quadrature.

Every operation returns a :class:`BoundReport`.  Hypotheses are certified
numerically first; when a certificate fails, the numbers are still computed
but the verdict is ``hypotheses_unmet`` and no inequality claim is made.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from hadamard.convexity import (
    CERTIFY_TOL,
    DEFAULT_GRID,
    ClassSpec,
    certify,
    certify_monotone,
    certify_nonnegative,
)
from hadamard.expr import DomainFault, Expr, as_expr, compile_expr, depends_on_x, pretty, scalar_function
from hadamard.means import log_mean
from hadamard.optimize import (
    DEFAULT_GRID as OPT_GRID,
    DEFAULT_REFINE_TOL,
    OptimizationError,
    maximize_scalar,
    minimize_scalar,
)
from hadamard.quad import DEFAULT_REL_TOL, Interval, QuadratureError, integrate, integrate_symmetric_product

THEOREM_IDS = (
    "classic",
    "gill",
    "cor1",
    "thm21_product",
    "cor22",
    "thm22_sandwich",
    "thm23_sandwich",
    "thm24_mconvex",
    "thm25_alpham",
)

HOLDS = "holds"
VIOLATED = "violated"
HYPOTHESES_UNMET = "hypotheses_unmet"

# rounding floor for comparing two independently rounded quantities
ROUNDING_REL = 64 * sys.float_info.epsilon


@dataclass(frozen=True)
class Settings:
    quad_tol: float = DEFAULT_REL_TOL
    certify_tol: float = CERTIFY_TOL
    verify_tol: float = 1e-9
    grid: tuple[int, int] = DEFAULT_GRID
    monotone_n: int = 101
    opt_grid: int = OPT_GRID
    opt_tol: float = DEFAULT_REFINE_TOL

    def __post_init__(self):
        if not 1e-14 <= self.quad_tol <= 1e-2:
            raise ValueError(f"quad_tol must lie in [1e-14, 1e-2], got {self.quad_tol!r}")
        for name in ("certify_tol", "verify_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite non-negative number, got {v!r}")
        if not (0 < self.opt_tol < 1):
            raise ValueError(f"opt_tol must lie in (0, 1), got {self.opt_tol!r}")
        if min(self.grid) < 2 or self.monotone_n < 2 or self.opt_grid < 3:
            raise ValueError("grid sizes need at least 2 points per axis and opt_grid at least 3")

    def to_dict(self) -> dict:
        return {
            "quad_tol": self.quad_tol,
            "certify_tol": self.certify_tol,
            "verify_tol": self.verify_tol,
            "grid": list(self.grid),
            "monotone_n": self.monotone_n,
            "opt_grid": self.opt_grid,
            "opt_tol": self.opt_tol,
        }


DEFAULT_SETTINGS = Settings()


@dataclass
class BoundReport:
    theorem_id: str
    inputs: dict
    quantities: dict = field(default_factory=dict)
    links: list = field(default_factory=list)
    quad_error: float = 0.0
    certificates: list = field(default_factory=list)
    verdict: str = HYPOTHESES_UNMET
    margin: Optional[float] = None
    verify_tol: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {
            "kind": "bound_report",
            "theorem_id": self.theorem_id,
            "inputs": self.inputs,
            "quantities": {k: _finite_or_none(v) for k, v in self.quantities.items()},
            "links": [
                {"name": n, "lhs": _finite_or_none(lo), "rhs": _finite_or_none(hi), "slack": _finite_or_none(hi - lo)}
                for n, lo, hi in self.links
            ],
            "quad_error": self.quad_error,
            "verify_tol": self.verify_tol,
            "certificates": [c.to_dict() for c in self.certificates],
            "verdict": self.verdict,
            "margin": _finite_or_none(self.margin),
            "notes": list(self.notes),
        }


def _finite_or_none(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


class _EvalFault(ArithmeticError):
    pass


def _at(f, x: float, label: str) -> float:
    """Evaluate an Expr or a compiled scalar function, raising on faults."""
    fn = f if callable(f) else scalar_function(f)
    try:
        return fn(x)
    except DomainFault as fault:
        raise _EvalFault(f"{label} faults at x = {x!r}: {fault}") from None


def _inputs(iv: Interval, settings: Settings, **exprs) -> dict:
    d = {"interval": [iv.a, iv.b]}
    for name, e in exprs.items():
        if isinstance(e, list):
            d[name] = [pretty(x) for x in e]
        elif e is not None:
            d[name] = pretty(e)
    d["settings"] = settings.to_dict()
    return d


def _finish(report: BoundReport, settings: Settings) -> BoundReport:
    """Fill verify_tol, margin and verdict from the links and certificates."""
    scale = max((max(abs(lo), abs(hi)) for _, lo, hi in report.links), default=0.0)
    report.verify_tol = max(settings.verify_tol, 10 * report.quad_error, ROUNDING_REL * scale)
    if report.links:
        report.margin = min(hi - lo for _, lo, hi in report.links)
    if not all(c.certified for c in report.certificates):
        report.verdict = HYPOTHESES_UNMET
        failed = [c for c in report.certificates if not c.certified]
        report.notes.append(f"{len(failed)} hypothesis certificate(s) not certified; no inequality claim made")
    elif not report.links:
        report.verdict = HYPOTHESES_UNMET
    elif all(hi - lo >= -report.verify_tol for _, lo, hi in report.links):
        report.verdict = HOLDS
    else:
        report.verdict = VIOLATED
    return report


def _fault(report: BoundReport, exc: Exception, settings: Settings) -> BoundReport:
    report.notes.append(f"evaluation fault: {exc}")
    report.links = []
    return _finish(report, settings)


def _product_fn(fs: Sequence[Expr]):
    fns = [compile_expr(f) for f in fs]
    if len(fns) == 1:
        return fns[0]

    def prod(x):
        out = fns[0](x)
        for fn in fns[1:]:
            out = out * fn(x)
        return out

    return prod


def _product_at(fs: Sequence[Expr], x: float) -> float:
    out = _at(fs[0], x, "f1")
    for i, f in enumerate(fs[1:], start=2):
        out = out * _at(f, x, f"f{i}")
    return out


def _mean(fn, iv: Interval, settings: Settings, exprs: Sequence[Expr] = ()):
    if exprs and not any(depends_on_x(e) for e in exprs):
        # constant integrand: its mean is its value, with no quadrature rounding
        v = float(fn(np.array([iv.a]))[0])
        if not math.isfinite(v):
            raise _EvalFault(f"integrand is not finite: {v!r}")
        return v, 0.0
    res = integrate(fn, iv, settings.quad_tol)
    return res.value / iv.width, res.err_estimate / iv.width


# -- Hadamard and Gill-type bounds ---------------------------------------------


def classic_hadamard(f: Expr | str, iv: Interval, settings: Settings = DEFAULT_SETTINGS) -> BoundReport:
    """``f((a+b)/2) <= mean of f <= (f(a)+f(b))/2`` for convex ``f``."""
    f = as_expr(f)
    report = BoundReport("classic", _inputs(iv, settings, f=f))
    report.certificates.append(certify(f, ClassSpec.convex(), iv, settings.grid, settings.certify_tol))
    try:
        lhs = _at(f, iv.midpoint, "f")
        fa, fb = _at(f, iv.a, "f"), _at(f, iv.b, "f")
        mean, err = _mean(compile_expr(f), iv, settings, [f])
    except (_EvalFault, QuadratureError) as exc:
        return _fault(report, exc, settings)
    rhs = (fa + fb) / 2
    report.quantities.update(lhs=lhs, integral_mean=mean, rhs=rhs, f_a=fa, f_b=fb)
    report.quad_error = err
    report.links = [("midpoint_value<=integral_mean", lhs, mean), ("integral_mean<=endpoint_average", mean, rhs)]
    return _finish(report, settings)


def gill_bound(
    f: Expr | str, iv: Interval, concave_variant: bool = False, settings: Settings = DEFAULT_SETTINGS
) -> BoundReport:
    """Integral mean against ``L(f(a), f(b))``; reversed for log-concave ``f``."""
    f = as_expr(f)
    report = BoundReport("gill", _inputs(iv, settings, f=f))
    report.inputs["concave_variant"] = concave_variant
    spec = ClassSpec.log_concave() if concave_variant else ClassSpec.log_convex()
    report.certificates.append(certify(f, spec, iv, settings.grid, settings.certify_tol))
    try:
        fa, fb = _at(f, iv.a, "f"), _at(f, iv.b, "f")
        mean, err = _mean(compile_expr(f), iv, settings, [f])
        rhs = log_mean(fa, fb)
    except (_EvalFault, QuadratureError, ValueError) as exc:
        return _fault(report, exc, settings)
    report.quantities.update(integral_mean=mean, rhs=rhs, f_a=fa, f_b=fb)
    report.quad_error = err
    report.links = [("log_mean<=integral_mean", rhs, mean)] if concave_variant else [
        ("integral_mean<=log_mean", mean, rhs)
    ]
    return _finish(report, settings)


def product_bound(
    fs: Sequence[Expr | str], iv: Interval, concave_variant: bool = False, settings: Settings = DEFAULT_SETTINGS
) -> BoundReport:
    """Integral mean of ``prod f_i`` against ``L(prod f_i(a), prod f_i(b))``."""
    fs = [as_expr(f) for f in fs]
    if not fs:
        raise ValueError("product_bound needs at least one function")
    report = BoundReport("thm21_product", _inputs(iv, settings, fi=fs))
    report.inputs["n"] = len(fs)
    report.inputs["concave_variant"] = concave_variant
    spec = ClassSpec.log_concave() if concave_variant else ClassSpec.log_convex()
    report.certificates.extend(certify(f, spec, iv, settings.grid, settings.certify_tol) for f in fs)
    try:
        pa, pb = _product_at(fs, iv.a), _product_at(fs, iv.b)
        mean, err = _mean(_product_fn(fs), iv, settings, fs)
        rhs = log_mean(pa, pb)
    except (_EvalFault, QuadratureError, ValueError) as exc:
        return _fault(report, exc, settings)
    report.quantities.update(integral_mean=mean, rhs=rhs, f_a=pa, f_b=pb)
    report.quad_error = err
    report.links = [("log_mean<=integral_mean", rhs, mean)] if concave_variant else [
        ("integral_mean<=log_mean", mean, rhs)
    ]
    return _finish(report, settings)


def split_point_phi(fs: Sequence[Expr | str], iv: Interval):
    """Return ``phi(x) = [(x-a) L(P(a),P(x)) + (b-x) L(P(x),P(b))] / (b-a)``.

    ``P`` is the product of ``fs``.  The weights are formed as ``w`` and
    ``1 - w`` so that ``phi(a)`` and ``phi(b)`` equal ``L(P(a), P(b))``
    exactly.
    """
    fs = [scalar_function(f) for f in fs]
    a, b = iv.a, iv.b
    pa, pb = _product_at(fs, a), _product_at(fs, b)

    def phi(x: float) -> float:
        px = _product_at(fs, x)
        w = (x - a) / (b - a)
        return w * log_mean(pa, px) + (1 - w) * log_mean(px, pb)

    return phi


def split_point_bound(
    fs: Sequence[Expr | str],
    iv: Interval,
    direction: str = "min_logconvex",
    settings: Settings = DEFAULT_SETTINGS,
    theorem_id: Optional[str] = None,
) -> BoundReport:
    """Best split point ``x`` for the two-piece logarithmic-mean bound."""
    if direction not in ("min_logconvex", "max_logconcave"):
        raise ValueError(f"unknown direction {direction!r}")
    fs = [as_expr(f) for f in fs]
    if not fs:
        raise ValueError("split_point_bound needs at least one function")
    theorem_id = theorem_id or ("cor1" if len(fs) == 1 else "cor22")
    report = BoundReport(theorem_id, _inputs(iv, settings, fi=fs))
    report.inputs["n"] = len(fs)
    report.inputs["direction"] = direction
    convex = direction == "min_logconvex"
    spec = ClassSpec.log_convex() if convex else ClassSpec.log_concave()
    report.certificates.extend(certify(f, spec, iv, settings.grid, settings.certify_tol) for f in fs)
    try:
        phi = split_point_phi(fs, iv)
        gill_value = log_mean(_product_at(fs, iv.a), _product_at(fs, iv.b))
        search = minimize_scalar if convex else maximize_scalar
        opt = search(phi, iv, settings.opt_grid, settings.opt_tol)
        mean, err = _mean(_product_fn(fs), iv, settings, fs)
    except (_EvalFault, QuadratureError, OptimizationError, ValueError) as exc:
        return _fault(report, exc, settings)
    report.quantities.update(
        integral_mean=mean,
        optimum=opt.value,
        gill_value=gill_value,
        evaluations=opt.evaluations,
    )
    report.quantities["minimizer_x" if convex else "maximizer_x"] = opt.x_star
    report.quad_error = err
    if convex:
        report.links = [("integral_mean<=optimum", mean, opt.value), ("optimum<=gill_value", opt.value, gill_value)]
    else:
        report.links = [("optimum<=integral_mean", opt.value, mean), ("gill_value<=optimum", gill_value, opt.value)]
    return _finish(report, settings)


# -- two-function sandwiches -------------------------------------------------


def sandwich_e9(f: Expr | str, g: Expr | str, iv: Interval, settings: Settings = DEFAULT_SETTINGS) -> BoundReport:
    """Sandwich with the symmetric-product integrand ``f(x)f(a+b-x) + g(x)g(a+b-x)``."""
    f, g = as_expr(f), as_expr(g)
    report = BoundReport("thm22_sandwich", _inputs(iv, settings, f=f, g=g))
    for e in (f, g):
        report.certificates.append(certify(e, ClassSpec.log_convex(), iv, settings.grid, settings.certify_tol))
    try:
        mid = iv.midpoint
        lhs = _at(f, mid, "f") * _at(g, mid, "g")
        fa, fb = _at(f, iv.a, "f"), _at(f, iv.b, "f")
        ga, gb = _at(g, iv.a, "g"), _at(g, iv.b, "g")
        ff, gg = compile_expr(f), compile_expr(g)
        if depends_on_x(f) or depends_on_x(g):
            res = integrate_symmetric_product(ff, gg, iv, settings.quad_tol)
            sym, err = res.value / iv.width, res.err_estimate / iv.width
        else:
            sym, err = fa * fb + ga * gb, 0.0
    except (_EvalFault, QuadratureError) as exc:
        return _fault(report, exc, settings)
    middle = 0.5 * sym
    rhs = (fa * fb + ga * gb) / 2
    report.quantities.update(lhs=lhs, middle=middle, rhs=rhs)
    report.quad_error = 0.5 * err
    report.links = [("lhs<=middle", lhs, middle), ("middle<=rhs", middle, rhs)]
    return _finish(report, settings)


def sandwich_e17(f: Expr | str, g: Expr | str, iv: Interval, settings: Settings = DEFAULT_SETTINGS) -> BoundReport:
    """Sandwich for the integral mean of ``f^2 + g^2``."""
    f, g = as_expr(f), as_expr(g)
    report = BoundReport("thm23_sandwich", _inputs(iv, settings, f=f, g=g))
    for e in (f, g):
        report.certificates.append(certify(e, ClassSpec.log_convex(), iv, settings.grid, settings.certify_tol))
    ff, gg = compile_expr(f), compile_expr(g)
    try:
        mid = iv.midpoint
        lhs = 2 * _at(f, mid, "f") * _at(g, mid, "g")
        fa, fb = _at(f, iv.a, "f"), _at(f, iv.b, "f")
        ga, gb = _at(g, iv.a, "g"), _at(g, iv.b, "g")
        middle, err = _mean(lambda x: ff(x) ** 2 + gg(x) ** 2, iv, settings, [f, g])
        rhs = (fa + fb) / 2 * log_mean(fa, fb) + (ga + gb) / 2 * log_mean(ga, gb)
    except (_EvalFault, QuadratureError, ValueError) as exc:
        return _fault(report, exc, settings)
    report.quantities.update(lhs=lhs, middle=middle, rhs=rhs)
    report.quad_error = err
    report.links = [("lhs<=middle", lhs, middle), ("middle<=rhs", middle, rhs)]
    return _finish(report, settings)


# -- m-convex and (alpha, m)-convex bounds -----------------------------------


def s_value(f_x: float, f_y: float, g_x: float, g_y: float, m1: float, m2: float) -> float:
    """One of S1/S2: ``f_x = f(a)``, ``f_y = f(b/m1)`` for S1, and a, b swapped for S2."""
    return (
        (f_x * f_x + g_x * g_x)
        + m1 * f_x * f_y
        + m2 * g_x * g_y
        + m1 * m1 * f_y * f_y
        + m2 * m2 * g_y * g_y
    ) / 6


def _alpha_fraction(alpha: float) -> tuple[float, float, float, float]:
    return alpha + 1, 2 * alpha, 2 * alpha * alpha, (alpha + 1) * (2 * alpha + 1)


def alpha_coefficients(alpha: float) -> tuple[float, float, float]:
    """Weights of ``A^2``, ``A B`` and ``B^2`` in the integral of ``(t^alpha A + (1-t^alpha) B)^2`` over [0, 1]."""
    n0, n1, n2, d = _alpha_fraction(alpha)
    return n0 / d, n1 / d, n2 / d


def e_value(f_x: float, f_y: float, g_x: float, g_y: float, a1: float, m1: float, a2: float, m2: float) -> float:
    """One of E1/E2, arguments as in :func:`s_value`.

    With ``a1 == a2`` the sum is taken over the common denominator in the
    same order as :func:`s_value`; at alpha = 1 every numerator term is then
    exactly twice the matching S term, so E equals S bit for bit.
    """
    p0, p1, p2, dp = _alpha_fraction(a1)
    q0, q1, q2, dq = _alpha_fraction(a2)
    if dp == dq:
        num = (
            (p0 * f_x * f_x + q0 * g_x * g_x)
            + p1 * m1 * f_x * f_y
            + q1 * m2 * g_x * g_y
            + p2 * m1 * m1 * f_y * f_y
            + q2 * m2 * m2 * g_y * g_y
        )
        return num / (2 * dp)
    f_part = (p0 * f_x * f_x + p1 * m1 * f_x * f_y + p2 * m1 * m1 * f_y * f_y) / dp
    g_part = (q0 * g_x * g_x + q1 * m2 * g_x * g_y + q2 * m2 * m2 * g_y * g_y) / dq
    return 0.5 * (f_part + g_part)


def _mclass_report(theorem_id, f, g, iv, spec_f, spec_g, settings, params):
    report = BoundReport(theorem_id, _inputs(iv, settings, f=f, g=g))
    report.inputs.update(params)
    m1, m2 = spec_f.m, spec_g.m
    lo = iv.a
    hi = max(iv.b / m1, iv.b / m2)
    report.inputs["evaluation_range"] = [lo, hi]
    for e, spec, m in ((f, spec_f, m1), (g, spec_g, m2)):
        report.certificates.append(certify(e, spec, iv, settings.grid, settings.certify_tol))
        report.certificates.append(certify_monotone(e, iv, settings.monotone_n, settings.certify_tol))
        report.certificates.append(
            certify_nonnegative(e, Interval(iv.a, iv.b / m), settings.monotone_n, settings.certify_tol)
        )
    if hi > iv.b:
        report.notes.append(
            f"bound evaluates f, g up to x = {hi!r} beyond b = {iv.b!r}; class membership was only checked on "
            f"[{iv.a!r}, {iv.b!r}] (combined points down to m*a)"
        )
    return report


def _endpoint_values(f, g, iv, m1, m2):
    a, b = iv.a, iv.b
    return {
        "f_a": _at(f, a, "f"),
        "f_b": _at(f, b, "f"),
        "g_a": _at(g, a, "g"),
        "g_b": _at(g, b, "g"),
        "f_b_over_m1": _at(f, b / m1, "f"),
        "f_a_over_m1": _at(f, a / m1, "f"),
        "g_b_over_m2": _at(g, b / m2, "g"),
        "g_a_over_m2": _at(g, a / m2, "g"),
    }


def _fg_mean(f, g, iv, settings):
    ff, gg = compile_expr(f), compile_expr(g)
    return _mean(lambda x: ff(x) * gg(x), iv, settings, [f, g])


def mconvex_bound(
    f: Expr | str, g: Expr | str, iv: Interval, m1: float, m2: float, settings: Settings = DEFAULT_SETTINGS
) -> BoundReport:
    """Integral mean of ``f g`` against ``min(S1, S2)`` for non-increasing m-convex ``f, g``."""
    f, g = as_expr(f), as_expr(g)
    spec_f, spec_g = ClassSpec.m_convex(m1), ClassSpec.m_convex(m2)
    report = _mclass_report("thm24_mconvex", f, g, iv, spec_f, spec_g, settings, {"m1": spec_f.m, "m2": spec_g.m})
    m1, m2 = spec_f.m, spec_g.m
    try:
        v = _endpoint_values(f, g, iv, m1, m2)
    except _EvalFault as exc:
        return _fault(report, exc, settings)
    s1 = s_value(v["f_a"], v["f_b_over_m1"], v["g_a"], v["g_b_over_m2"], m1, m2)
    s2 = s_value(v["f_b"], v["f_a_over_m1"], v["g_b"], v["g_a_over_m2"], m1, m2)
    report.quantities.update(S1=s1, S2=s2, rhs=min(s1, s2), **v)
    try:
        mean, err = _fg_mean(f, g, iv, settings)
    except QuadratureError as exc:
        return _fault(report, exc, settings)
    report.quantities.update(lhs=mean, integral_mean=mean)
    report.quad_error = err
    report.links = [("integral_mean<=min(S1,S2)", mean, min(s1, s2))]
    return _finish(report, settings)


def alpham_bound(
    f: Expr | str,
    g: Expr | str,
    iv: Interval,
    a1: float,
    m1: float,
    a2: float,
    m2: float,
    settings: Settings = DEFAULT_SETTINGS,
) -> BoundReport:
    """Integral mean of ``f g`` against ``min(E1, E2)`` for non-increasing (alpha, m)-convex ``f, g``."""
    f, g = as_expr(f), as_expr(g)
    spec_f, spec_g = ClassSpec.alpha_m_convex(a1, m1), ClassSpec.alpha_m_convex(a2, m2)
    params = {"alpha1": spec_f.alpha, "m1": spec_f.m, "alpha2": spec_g.alpha, "m2": spec_g.m}
    report = _mclass_report("thm25_alpham", f, g, iv, spec_f, spec_g, settings, params)
    a1, m1, a2, m2 = spec_f.alpha, spec_f.m, spec_g.alpha, spec_g.m
    try:
        v = _endpoint_values(f, g, iv, m1, m2)
    except _EvalFault as exc:
        return _fault(report, exc, settings)
    e1 = e_value(v["f_a"], v["f_b_over_m1"], v["g_a"], v["g_b_over_m2"], a1, m1, a2, m2)
    e2 = e_value(v["f_b"], v["f_a_over_m1"], v["g_b"], v["g_a_over_m2"], a1, m1, a2, m2)
    report.quantities.update(E1=e1, E2=e2, rhs=min(e1, e2), **v)
    try:
        mean, err = _fg_mean(f, g, iv, settings)
    except QuadratureError as exc:
        return _fault(report, exc, settings)
    report.quantities.update(lhs=mean, integral_mean=mean)
    report.quad_error = err
    report.links = [("integral_mean<=min(E1,E2)", mean, min(e1, e2))]
    return _finish(report, settings)


def verify_elementary(c: float, d: float) -> bool:
    """``c d <= (c^2 + d^2) / 2`` for non-negative reals."""
    if c < 0 or d < 0:
        raise ValueError(f"arguments must be non-negative, got ({c!r}, {d!r})")
    return c * d <= (c * c + d * d) / 2
