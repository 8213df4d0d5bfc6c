"""Seeded generation of certified class members and batch fuzzing of the bounds."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from hadamard import bounds
from hadamard.bounds import DEFAULT_SETTINGS, HOLDS, HYPOTHESES_UNMET, VIOLATED, Settings
from hadamard.convexity import ClassSpec, certify, certify_monotone
from hadamard.expr import Expr, parse, pretty
from hadamard.quad import Interval

RNG_ALGORITHM = "numpy.PCG64/SeedSequence.spawn/v1"
FAMILIES = ("exp_quadratic", "positive_quadratic", "shifted_power", "constant")
MAX_DISCARDS = 1000
INTERVAL_RANGE = (0.1, 3.0)
MIN_WIDTH = 0.2
HISTOGRAM_EDGES = (0.0, 1e-12, 1e-9, 1e-6, 1e-3, 1.0)
COEFF_DIGITS = 6
PRESCREEN_GRID = (3, 2)


class GenerationError(RuntimeError):
    def __init__(self, spec: "GeneratorSpec", discarded: int, last: Optional[Expr]):
        self.spec = spec
        self.discarded = discarded
        self.last = last
        super().__init__(
            f"no {spec.family} draw certified as {spec.cls.label()} after {discarded} consecutive discards"
        )


@dataclass(frozen=True)
class GeneratorSpec:
    cls: ClassSpec
    family: str
    ranges: dict = field(default_factory=dict)
    seed: int = 0
    require_non_increasing: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")

    def range(self, name: str) -> tuple[float, float]:
        lo, hi = self.ranges.get(name, _default_range(self.family, self.cls, name))
        if not lo <= hi:
            raise ValueError(f"empty coefficient range for {name}: [{lo}, {hi}]")
        return lo, hi


def _default_range(family: str, cls: ClassSpec, name: str) -> tuple[float, float]:
    if family == "exp_quadratic" and name == "p":
        return (-2.0, 0.0) if cls.kind == "log_concave" else (0.0, 2.0)
    if family == "positive_quadratic":
        return {"p": (0.0, 2.0), "q": (-2.0, 2.0), "r": (0.1, 2.0)}[name]
    if family == "shifted_power":
        return {"shift": (0.0, 2.0), "k": (1, 2)}[name]
    if family == "constant":
        return (0.1, 2.0)
    return (-2.0, 2.0)


@dataclass(frozen=True)
class Generated:
    expr: Expr
    text: str
    certificates: tuple
    discarded: int


def _coef(rng: np.random.Generator, lo: float, hi: float) -> float:
    return round(float(rng.uniform(lo, hi)), COEFF_DIGITS)


def draw(spec: GeneratorSpec, iv: Interval, rng: np.random.Generator) -> str:
    """One uncertified candidate from the family, as DSL text."""
    if spec.family == "exp_quadratic":
        p, q, r = (_coef(rng, *spec.range(n)) for n in "pqr")
        return f"exp(({p!r})*x^2+({q!r})*x+({r!r}))"
    if spec.family == "positive_quadratic":
        p, q, r = (_coef(rng, *spec.range(n)) for n in "pqr")
        return f"({p!r})*x^2+({q!r})*x+({r!r})"
    if spec.family == "shifted_power":
        c = round(iv.b + float(rng.uniform(*spec.range("shift"))), COEFF_DIGITS)
        lo, hi = spec.range("k")
        k = 2 * int(rng.integers(int(lo), int(hi) + 1))
        return f"({c!r}-x)^{k}"
    return repr(_coef(rng, *spec.range("c")))


def generate(
    spec: GeneratorSpec,
    iv: Interval,
    rng: Optional[np.random.Generator] = None,
    settings: Settings = DEFAULT_SETTINGS,
    max_discards: int = MAX_DISCARDS,
) -> Generated:
    """Draw until a candidate certifies for ``spec.cls`` on ``iv``.

    Deterministic given ``rng`` (or ``spec.seed`` when no generator is
    passed).  Raises :class:`GenerationError` after ``max_discards``
    consecutive failures.
    """
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
    last = None
    for discarded in range(max_discards):
        text = draw(spec, iv, rng)
        last = parse(text)
        # a coarse refutation is already a genuine counterexample; skip the full grid
        if certify(last, spec.cls, iv, PRESCREEN_GRID, settings.certify_tol).verdict == "refuted":
            continue
        certs = [certify(last, spec.cls, iv, settings.grid, settings.certify_tol)]
        if certs[0].certified and spec.require_non_increasing:
            certs.append(certify_monotone(last, iv, settings.monotone_n, settings.certify_tol))
        if all(c.certified for c in certs):
            return Generated(last, text, tuple(certs), discarded)
    raise GenerationError(spec, max_discards, last)


# -- fuzzing -----------------------------------------------------------------


@dataclass(frozen=True)
class FuzzConfig:
    """What to fuzz; unset fields take per-theorem defaults."""

    theorem_id: str
    family: Optional[str] = None
    n: Optional[int] = None
    m1: float = 1.0
    m2: float = 1.0
    alpha1: float = 1.0
    alpha2: float = 1.0
    concave: bool = False
    max_discards: int = MAX_DISCARDS

    def __post_init__(self):
        if self.theorem_id not in bounds.THEOREM_IDS:
            raise ValueError(f"unknown theorem {self.theorem_id!r}")

    def class_specs(self) -> tuple[ClassSpec, ClassSpec]:
        t = self.theorem_id
        if t == "classic":
            return ClassSpec.convex(), ClassSpec.convex()
        if t == "thm24_mconvex":
            return ClassSpec.m_convex(self.m1), ClassSpec.m_convex(self.m2)
        if t == "thm25_alpham":
            return ClassSpec.alpha_m_convex(self.alpha1, self.m1), ClassSpec.alpha_m_convex(self.alpha2, self.m2)
        if self.concave and t in ("gill", "thm21_product", "cor1", "cor22"):
            return ClassSpec.log_concave(), ClassSpec.log_concave()
        return ClassSpec.log_convex(), ClassSpec.log_convex()

    def default_family(self) -> str:
        if self.family:
            return self.family
        if self.theorem_id in ("thm24_mconvex", "thm25_alpham"):
            return "shifted_power"
        return "exp_quadratic"

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "family": self.default_family(),
            "n": self.n,
            "m1": self.m1,
            "m2": self.m2,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "concave": self.concave,
            "max_discards": self.max_discards,
        }


@dataclass
class TrialRecord:
    """Everything needed to replay one trial."""

    trial: int
    theorem_id: str
    exprs: list
    interval: tuple
    params: dict
    verdict: str
    margin: Optional[float]
    verify_tol: float
    discarded: int
    generation_failed: bool

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "theorem_id": self.theorem_id,
            "exprs": list(self.exprs),
            "interval": list(self.interval),
            "params": dict(self.params),
            "verdict": self.verdict,
            "margin": _num(self.margin),
            "verify_tol": self.verify_tol,
            "discarded": self.discarded,
            "generation_failed": self.generation_failed,
        }


def _num(v):
    if v is None or not math.isfinite(v):
        return None
    return float(v)


@dataclass
class FuzzSummary:
    theorem_id: str
    config: dict
    trials: int
    holds: int
    hypotheses_unmet: int
    violations: int
    min_margin: Optional[float]
    margin_histogram: dict
    discarded_draws: int
    generation_failures: int
    seed: int
    rng_algorithm: str = RNG_ALGORITHM
    violation_records: list = field(default_factory=list)
    records: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": "fuzz_summary",
            "theorem_id": self.theorem_id,
            "config": self.config,
            "trials": self.trials,
            "holds": self.holds,
            "hypotheses_unmet": self.hypotheses_unmet,
            "violations": self.violations,
            "min_margin": _num(self.min_margin),
            "margin_histogram": self.margin_histogram,
            "discarded_draws": self.discarded_draws,
            "generation_failures": self.generation_failures,
            "seed": self.seed,
            "rng_algorithm": self.rng_algorithm,
            "violation_records": [r.to_dict() for r in self.violation_records],
        }

    def margins_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "verdict", "margin", "verify_tol", "discarded", "generation_failed"])
        for r in self.records:
            w.writerow([r.trial, r.verdict, repr(r.margin) if r.margin is not None else "",
                        repr(r.verify_tol), r.discarded, int(r.generation_failed)])
        return buf.getvalue()


def _histogram_key(margin: float) -> str:
    if margin < 0:
        return "<0"
    lower = "0"
    for edge in HISTOGRAM_EDGES[1:]:
        if margin < edge:
            return f"[{lower},{edge!r})"
        lower = repr(edge)
    return f">={HISTOGRAM_EDGES[-1]!r}"


def _empty_histogram() -> dict:
    keys = ["<0"]
    lower = "0"
    for edge in HISTOGRAM_EDGES[1:]:
        keys.append(f"[{lower},{edge!r})")
        lower = repr(edge)
    keys.append(f">={HISTOGRAM_EDGES[-1]!r}")
    return {k: 0 for k in keys}


def draw_interval(rng: np.random.Generator) -> Interval:
    lo, hi = INTERVAL_RANGE
    a = round(float(rng.uniform(lo, hi - MIN_WIDTH)), COEFF_DIGITS)
    b = round(float(rng.uniform(a + MIN_WIDTH, hi)), COEFF_DIGITS)
    return Interval(a, b)


def run_bound(theorem_id: str, exprs, iv: Interval, params: dict, settings: Settings = DEFAULT_SETTINGS):
    """Dispatch one bound computation by theorem id."""
    concave = params.get("concave", False)
    if theorem_id == "classic":
        return bounds.classic_hadamard(exprs[0], iv, settings)
    if theorem_id == "gill":
        return bounds.gill_bound(exprs[0], iv, concave, settings)
    if theorem_id == "thm21_product":
        return bounds.product_bound(exprs, iv, concave, settings)
    if theorem_id in ("cor1", "cor22"):
        direction = "max_logconcave" if concave else "min_logconvex"
        return bounds.split_point_bound(exprs, iv, direction, settings, theorem_id=theorem_id)
    if theorem_id == "thm22_sandwich":
        return bounds.sandwich_e9(exprs[0], exprs[1], iv, settings)
    if theorem_id == "thm23_sandwich":
        return bounds.sandwich_e17(exprs[0], exprs[1], iv, settings)
    if theorem_id == "thm24_mconvex":
        return bounds.mconvex_bound(exprs[0], exprs[1], iv, params["m1"], params["m2"], settings)
    if theorem_id == "thm25_alpham":
        return bounds.alpham_bound(
            exprs[0], exprs[1], iv, params["alpha1"], params["m1"], params["alpha2"], params["m2"], settings
        )
    raise ValueError(f"unknown theorem {theorem_id!r}")


def _arity(config: FuzzConfig, rng: np.random.Generator) -> int:
    t = config.theorem_id
    if t in ("classic", "gill", "cor1"):
        return 1
    if t in ("thm22_sandwich", "thm23_sandwich", "thm24_mconvex", "thm25_alpham"):
        return 2
    if config.n is not None:
        return int(config.n)
    return int(rng.integers(1, 4))


def run_trial(config: FuzzConfig, trial: int, seed_seq: np.random.SeedSequence, settings: Settings = DEFAULT_SETTINGS):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    iv = draw_interval(rng)
    n = _arity(config, rng)
    specs = config.class_specs()
    family = config.default_family()
    non_increasing = config.theorem_id in ("thm24_mconvex", "thm25_alpham")
    texts, discarded, failed = [], 0, False
    for i in range(n):
        gspec = GeneratorSpec(specs[min(i, 1)], family, require_non_increasing=non_increasing)
        try:
            got = generate(gspec, iv, rng, settings, config.max_discards)
            texts.append(got.text)
            discarded += got.discarded
        except GenerationError as exc:
            # run the bound on the uncertified draw; its certificates will say so
            texts.append(pretty(exc.last))
            discarded += exc.discarded
            failed = True
    params = {"m1": config.m1, "m2": config.m2, "alpha1": config.alpha1, "alpha2": config.alpha2,
              "concave": config.concave, "n": n}
    report = run_bound(config.theorem_id, [parse(t) for t in texts], iv, params, settings)
    record = TrialRecord(
        trial=trial,
        theorem_id=config.theorem_id,
        exprs=texts,
        interval=(iv.a, iv.b),
        params=params,
        verdict=report.verdict,
        margin=report.margin,
        verify_tol=report.verify_tol,
        discarded=discarded,
        generation_failed=failed,
    )
    return record, report


def replay(record: dict | TrialRecord, settings: Settings = DEFAULT_SETTINGS):
    """Recompute the bound report for a stored trial record."""
    if isinstance(record, TrialRecord):
        record = record.to_dict()
    iv = Interval(*record["interval"])
    return run_bound(record["theorem_id"], [parse(t) for t in record["exprs"]], iv, record["params"], settings)


def fuzz(config: FuzzConfig | str, trials: int, seed: int, settings: Settings = DEFAULT_SETTINGS) -> FuzzSummary:
    """Run ``trials`` independent seeded trials and aggregate.

    Each trial draws from its own child of ``SeedSequence(seed)``, so a
    summary depends only on ``(config, trials, seed, settings)``.
    """
    if isinstance(config, str):
        config = FuzzConfig(config)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    records = [run_trial(config, i, child, settings)[0] for i, child in enumerate(children)]
    return summarize(config, records, seed)


def summarize(config: FuzzConfig, records: list, seed: int) -> FuzzSummary:
    hist = _empty_histogram()
    counts = {HOLDS: 0, HYPOTHESES_UNMET: 0, VIOLATED: 0}
    min_margin = None
    for r in records:
        counts[r.verdict] += 1
        if r.verdict != HYPOTHESES_UNMET and r.margin is not None:
            hist[_histogram_key(r.margin)] += 1
            min_margin = r.margin if min_margin is None else min(min_margin, r.margin)
    return FuzzSummary(
        theorem_id=config.theorem_id,
        config=config.to_dict(),
        trials=len(records),
        holds=counts[HOLDS],
        hypotheses_unmet=counts[HYPOTHESES_UNMET],
        violations=counts[VIOLATED],
        min_margin=min_margin,
        margin_histogram=hist,
        discarded_draws=sum(r.discarded for r in records),
        generation_failures=sum(r.generation_failed for r in records),
        seed=seed,
        violation_records=[r for r in records if r.verdict == VIOLATED],
        records=records,
    )
