"""Open-world cardinality estimators over frequency statistics.

Three estimators are provided: the uniform maximum-likelihood estimator,
Chao84 (driven by singletons and doubletons) and the coverage-based Chao92
which corrects for skew through an estimated coefficient of variation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Iterator, Mapping

from .stream import (
    AnswerStream,
    FrequencyStatistics,
    compute_fstat,
    f1_ratio,
    prefix,
    prefix_lengths,
)

if TYPE_CHECKING:
    from .heuristics import HeuristicConfig

INSUFFICIENT_DUPLICATION = "insufficient_duplication"
LOW_CONFIDENCE = "low_confidence"


@dataclass(frozen=True)
class CardinalityEstimate:
    value: float
    kind: str
    coverage: float | None = None
    cv_squared: float | None = None
    flags: tuple[str, ...] = ()

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def _require_sample(fstat: FrequencyStatistics, min_n: int = 1) -> None:
    if fstat.n < min_n:
        raise ValueError(f"estimator needs n >= {min_n}, got n={fstat.n}")
    if fstat.c < 1:
        raise ValueError("estimator needs at least one distinct answer")


def _occupancy_gap(N: float, n: int, c: int) -> float:
    # N * (1 - exp(-n/N)) - c, with expm1 for accuracy at large N
    return -N * math.expm1(-n / N) - c


def estimate_uniform_mle(fstat: FrequencyStatistics) -> CardinalityEstimate:
    """Solve ``c = N (1 - exp(-n/N))`` for N by bisection.

    The left side is increasing in N and falls short of ``c`` at ``N = c``,
    so the root is bracketed by ``[c, hi]`` once ``hi`` is grown past it.
    When every answer is distinct the root escapes to infinity and ``inf``
    is returned with the ``insufficient_duplication`` flag.
    """
    _require_sample(fstat)
    n, c = fstat.n, fstat.c
    if c > n:
        raise ValueError(f"c={c} exceeds n={n}")
    if c == n:
        return CardinalityEstimate(math.inf, "uniform_mle", flags=(INSUFFICIENT_DUPLICATION,))

    lo, hi = float(c), max(10.0 * n, float(c))
    while _occupancy_gap(hi, n, c) <= 0:
        lo, hi = hi, hi * 2.0
    if _occupancy_gap(lo, n, c) >= 0:
        return CardinalityEstimate(lo, "uniform_mle")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _occupancy_gap(mid, n, c) < 0:
            lo = mid
        else:
            hi = mid
    best = min((lo, hi), key=lambda N: abs(_occupancy_gap(N, n, c)))
    return CardinalityEstimate(best, "uniform_mle")


def estimate_chao84(fstat: FrequencyStatistics) -> CardinalityEstimate:
    """``c + f1^2 / (2 f2)``; falls back to ``c + f1 (f1 - 1) / 2`` when f2 = 0."""
    _require_sample(fstat)
    f1, f2 = fstat.f1, fstat.f2
    if f2 > 0:
        value = fstat.c + f1 * f1 / (2.0 * f2)
    else:
        value = fstat.c + f1 * (f1 - 1) / 2.0
    return CardinalityEstimate(float(value), "chao84")


def sample_coverage(fstat: FrequencyStatistics) -> float:
    """Good-Turing coverage ``1 - f1/n``, floored at ``1/(2n)``.

    The floor only binds when every answer is a singleton; it keeps the
    coverage-based estimators finite on very short prefixes.
    """
    if fstat.n < 1:
        raise ValueError("coverage needs n >= 1")
    return max(1.0 - fstat.f1 / fstat.n, 1.0 / (2 * fstat.n))


def cv_squared(fstat: FrequencyStatistics) -> float:
    """Estimated squared coefficient of variation of the class probabilities."""
    if fstat.n < 2:
        raise ValueError("cv estimate needs two samples")
    coverage = sample_coverage(fstat)
    pairs = sum(j * (j - 1) * v for j, v in fstat.f.items())
    raw = (fstat.c / coverage) * pairs / (fstat.n * (fstat.n - 1)) - 1.0
    return max(raw, 0.0)


def estimate_chao92(fstat: FrequencyStatistics) -> CardinalityEstimate:
    _require_sample(fstat, min_n=2)
    coverage = sample_coverage(fstat)
    g2 = cv_squared(fstat)
    value = fstat.c / coverage
    if g2 > 0:
        value += fstat.n * (1.0 - coverage) / coverage * g2
    flags = (LOW_CONFIDENCE,) if fstat.f1 == fstat.n else ()
    return CardinalityEstimate(value, "chao92", coverage=coverage, cv_squared=g2, flags=flags)


def completeness(fstat: FrequencyStatistics, est: CardinalityEstimate) -> float:
    """Observed distinct answers as a fraction of the estimated cardinality."""
    if math.isinf(est.value):
        return 0.0
    if est.value <= 0:
        raise ValueError("estimate must be positive")
    return min(fstat.c / est.value, 1.0)


ESTIMATORS: dict[str, Callable[[FrequencyStatistics], CardinalityEstimate]] = {
    "uniform": estimate_uniform_mle,
    "chao84": estimate_chao84,
    "chao92": estimate_chao92,
}


@dataclass(frozen=True)
class EstimateRow:
    hits: int
    unique: int
    f1_ratio: float
    estimates: Mapping[str, float | None] = field(default_factory=dict)
    # square root of the Chao92 CV estimate; None when n < 2
    gamma: float | None = None


@dataclass(frozen=True)
class EstimateSeries:
    rows: tuple[EstimateRow, ...]
    estimators: tuple[str, ...]

    def __post_init__(self) -> None:
        hits = [r.hits for r in self.rows]
        if any(b <= a for a, b in zip(hits, hits[1:])):
            raise ValueError("series hits must be strictly increasing")

    def column(self, name: str) -> list[float | None]:
        return [row.estimates.get(name) for row in self.rows]

    @property
    def final(self) -> EstimateRow:
        return self.rows[-1]


def _safe(fn: Callable[[FrequencyStatistics], CardinalityEstimate], fstat: FrequencyStatistics) -> float | None:
    try:
        return fn(fstat).value
    except ValueError:
        return None


def _evaluate(
    sample: AnswerStream, names: tuple[str, ...], heuristic: HeuristicConfig | None
) -> dict[str, float | None]:
    if heuristic is None:
        fstat = compute_fstat(sample)
        return {name: _safe(ESTIMATORS[name], fstat) for name in names}

    from .heuristics import apply_heuristic
    totals: dict[str, list[float]] = {name: [] for name in names}
    missing: set[str] = set()
    for rep in range(heuristic.repetitions):
        truncated = apply_heuristic(sample, heuristic, rep)
        fstat = compute_fstat(truncated)
        for name in names:
            value = _safe(ESTIMATORS[name], fstat)
            if value is None:
                missing.add(name)
            else:
                totals[name].append(value)
    return {
        name: None if name in missing else sum(vals) / len(vals)
        for name, vals in totals.items()
    }


def iter_estimates(
    stream: AnswerStream,
    step: int,
    estimators: Iterable[str] = ("uniform", "chao84", "chao92"),
    heuristic: HeuristicConfig | None = None,
) -> Iterator[EstimateRow]:
    """Yield one row per evaluated prefix, in order.

    With a heuristic, truncation is applied to each prefix separately and
    only the estimates see the truncated sample; ``unique`` and
    ``f1_ratio`` always describe the raw prefix.
    """
    names = tuple(estimators)
    unknown = [n for n in names if n not in ESTIMATORS]
    if unknown:
        raise ValueError(f"unknown estimators: {', '.join(unknown)}")
    for k in prefix_lengths(len(stream), step):
        sample = prefix(stream, k)
        fstat = compute_fstat(sample)
        try:
            gamma = math.sqrt(cv_squared(fstat))
        except ValueError:
            gamma = None
        yield EstimateRow(
            hits=k,
            unique=fstat.c,
            f1_ratio=f1_ratio(fstat),
            estimates=_evaluate(sample, names, heuristic),
            gamma=gamma,
        )


def estimate_series(
    stream: AnswerStream,
    step: int,
    estimators: Iterable[str] = ("uniform", "chao84", "chao92"),
    heuristic: HeuristicConfig | None = None,
) -> EstimateSeries:
    names = tuple(estimators)
    return EstimateSeries(tuple(iter_estimates(stream, step, names, heuristic)), names)
