"""Pay-as-you-go: how many new unique answers would ``m`` more HITs bring?

Two predictors are offered. The coverage predictor treats the estimated
unseen items as equally likely and uses the Good-Turing coverage gap as
the chance that the next answer is new. The spline predictor fits a
cubic spline to the permutation-averaged accumulation curve and
extrapolates it past the last observed hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from . import spline as _spline
from .estimators import estimate_chao92, sample_coverage
from .stream import AnswerStream, FrequencyStatistics, SACurve, compute_fstat

KNOT_TARGET = 25


@dataclass(frozen=True)
class PaygoPrediction:
    m: int
    expected_new_uniques: float
    method: Literal["shen", "spline"]


def shen_formula(w: float, coverage: float, m: int) -> float:
    """Expected new items among ``m`` draws for ``w`` equally likely unseen items.

    Each draw hits an unseen item with probability ``1 - coverage``, so each
    unseen item is missed with probability ``1 - (1 - coverage)/w`` per draw.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if w <= 0 or m == 0:
        return 0.0
    p_item = (1.0 - coverage) / w
    if p_item >= 1.0:
        return float(w)
    return -w * math.expm1(m * math.log1p(-p_item))


def shen_predict(fstat: FrequencyStatistics, m: int) -> PaygoPrediction:
    """Coverage-based prediction with ``w = N_chao92 - c`` unseen items."""
    est = estimate_chao92(fstat)
    w = est.value - fstat.c
    value = shen_formula(w, sample_coverage(fstat), m)
    return PaygoPrediction(m, value, "shen")


def permutation_order(n: int, seed: int, index: int) -> np.ndarray:
    """Record order used for permutation ``index`` of :func:`mean_sac`."""
    return np.random.default_rng([seed, index]).permutation(n)


def mean_sac(
    stream: AnswerStream, permutations: int = 100, seed: int = 0, include_identity: bool = False
) -> SACurve:
    """Accumulation curve averaged over random reorderings of the records.

    Permutation ``i`` draws from its own generator seeded by ``(seed, i)``.
    With ``include_identity`` the first "permutation" is the arrival order.
    """
    if permutations < 1:
        raise ValueError("permutations must be >= 1")
    n = len(stream)
    if n == 0:
        return SACurve((), ())
    _, codes = np.unique(np.array(stream.answers, dtype=object), return_inverse=True)
    total = np.zeros(n)
    for i in range(permutations):
        order = np.arange(n) if include_identity and i == 0 else permutation_order(n, seed, i)
        permuted = codes[order]
        first = np.zeros(n, dtype=bool)
        first[np.unique(permuted, return_index=True)[1]] = True
        total += np.cumsum(first)
    return SACurve(tuple(range(1, n + 1)), tuple((total / permutations).tolist()))


@dataclass(frozen=True)
class SplineModel:
    """Natural cubic spline through a subsample of an accumulation curve."""

    knots: tuple[tuple[float, float], ...]
    coefficients: tuple[tuple[float, float, float, float], ...]
    permutations: int | None = None
    seed: int | None = None
    boundary: str = "natural"

    @property
    def _x(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots], dtype=float)

    def __call__(self, x):
        return _spline.evaluate(self._x, np.array(self.coefficients), x)

    @property
    def last_hits(self) -> float:
        return self.knots[-1][0]

    @property
    def end_slope(self) -> float:
        a, b, c, e = self.coefficients[-1]
        h = self.knots[-1][0] - self.knots[-2][0]
        return b + 2 * c * h + 3 * e * h * h


def knot_indices(n: int) -> list[int]:
    step = max(1, n // KNOT_TARGET)
    idx = list(range(0, n, step))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    return idx


def spline_fit(
    curve: SACurve,
    permutations: int | None = None,
    seed: int | None = None,
    boundary: str = "natural",
) -> SplineModel:
    """Fit a natural cubic spline through every ``max(1, n // 25)``-th point.

    The last point is always a knot. If the natural spline dips anywhere,
    the offending knot slopes are limited so the curve stays non-decreasing.
    """
    if len(curve) < 4:
        raise ValueError("spline fit needs at least 4 points")
    idx = knot_indices(len(curve))
    x = np.array([curve.hits[i] for i in idx], dtype=float)
    y = np.array([curve.unique[i] for i in idx], dtype=float)
    d = _spline.monotone_slopes(x, y, _spline.knot_slopes(x, y, boundary))
    coef = _spline.hermite_coefficients(x, y, d)
    return SplineModel(
        knots=tuple(zip(x.tolist(), y.tolist())),
        coefficients=tuple(tuple(row) for row in coef.tolist()),
        permutations=permutations,
        seed=seed,
        boundary=boundary,
    )


def _plateau_offset(model: SplineModel) -> float:
    """Distance past the last knot where the extended segment stops rising."""
    a, b, c, e = model.coefficients[-1]
    L = model.knots[-1][0] - model.knots[-2][0]
    # slope of the segment is b + 2c u + 3e u^2, u measured from the segment start
    if model.end_slope <= 0:
        return 0.0
    if e == 0:
        return math.inf if c >= 0 else max(0.0, (-b / (2 * c)) - L)
    disc = 4 * c * c - 12 * e * b
    if disc < 0:
        return math.inf
    roots = sorted(((-2 * c - s * math.sqrt(disc)) / (6 * e)) for s in (1.0, -1.0))
    for u in roots:
        if u > L and 2 * c + 6 * e * u < 0:
            return u - L
    return math.inf


def spline_predict(
    model: SplineModel, n: int, m: int, extension: Literal["linear", "cubic"] = "linear"
) -> PaygoPrediction:
    """Extra uniques after ``m`` more hits, read off the spline past its last knot.

    ``linear`` continues along the end slope (the natural boundary
    condition leaves no curvature there). ``cubic`` continues the last
    cubic segment instead, held constant from its turning point on so the
    prediction never decreases in ``m``. Either way the gain is clipped to
    ``[0, end_slope * m]``.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if not math.isclose(n, model.last_hits):
        raise ValueError(f"n={n} is not the last knot ({model.last_hits})")
    if m == 0:
        return PaygoPrediction(0, 0.0, "spline")
    ceiling = max(model.end_slope, 0.0) * m
    if extension == "linear":
        gain = ceiling
    elif extension == "cubic":
        reach = min(float(m), _plateau_offset(model))
        gain = float(model(n + reach) - model(n))
    else:
        raise ValueError(f"unknown extension {extension!r}")
    return PaygoPrediction(m, max(0.0, min(gain, ceiling)), "spline")


def paygo_table(
    stream: AnswerStream,
    ms: Iterable[int],
    permutations: int = 100,
    seed: int = 0,
    heuristic=None,
    extension: Literal["linear", "cubic"] = "linear",
) -> list[PaygoPrediction]:
    """Both predictors for every ``m``, evaluated at the end of ``stream``.

    ``heuristic`` (a :class:`~openworld.heuristics.HeuristicConfig`) is
    opt-in and only affects the coverage predictor; combining it with
    streaker truncation tends to under-predict.
    """
    ms = [int(m) for m in ms]
    sample = stream
    if heuristic is not None:
        from .heuristics import apply_heuristic
        sample = apply_heuristic(stream, heuristic)
    fstat = compute_fstat(sample)
    model = spline_fit(mean_sac(stream, permutations, seed), permutations, seed)
    out = [shen_predict(fstat, m) for m in ms]
    out += [spline_predict(model, len(stream), m, extension) for m in ms]
    return out
