import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.interpolate import CubicSpline

from openworld import spline
from openworld.estimators import estimate_chao92
from openworld.paygo import (
    knot_indices,
    mean_sac,
    paygo_table,
    shen_formula,
    shen_predict,
    spline_fit,
    spline_predict,
)
from openworld.simulator import ItemDistribution, WorkerModel, simulate
from openworld.stream import AnswerStream, FrequencyStatistics, SACurve, prefix, sac


def curve_of(values):
    return SACurve(tuple(range(1, len(values) + 1)), tuple(values))


class TestShen:
    def test_reference_value(self):
        mpmath.mp.dps = 40
        exact = 10 * (1 - mpmath.mpf("0.99") ** 10)
        assert shen_formula(10, 0.9, 10) == pytest.approx(float(exact), rel=1e-14)
        assert shen_formula(10, 0.9, 10) == pytest.approx(0.956179249911955, rel=1e-14)

    def test_zero_m(self):
        assert shen_formula(10, 0.9, 0) == 0.0

    def test_saturates_at_w(self):
        assert shen_formula(10, 0.9, 100000) == pytest.approx(10.0)

    def test_no_unseen(self):
        assert shen_formula(0.0, 1.0, 50) == 0.0
        assert shen_predict(FrequencyStatistics.from_f({3: 10}), 50).expected_new_uniques == 0.0

    @given(st.floats(0.1, 500), st.floats(0.01, 1.0), st.integers(0, 400), st.integers(0, 400))
    def test_monotone_and_bounded(self, w, coverage, m1, m2):
        lo, hi = sorted((m1, m2))
        a, b = shen_formula(w, coverage, lo), shen_formula(w, coverage, hi)
        assert 0 <= a <= b + 1e-12
        assert b <= w + 1e-9

    def test_predict_uses_chao92_gap(self):
        fs = FrequencyStatistics.from_f({1: 12, 2: 10, 4: 8})
        w = estimate_chao92(fs).value - fs.c
        got = shen_predict(fs, 25).expected_new_uniques
        assert got == pytest.approx(w * (1 - (1 - (fs.f1 / fs.n) / w) ** 25))


class TestMeanSac:
    def test_identity_permutation(self):
        s = AnswerStream.from_answers("abacbdd")
        assert mean_sac(s, 1, include_identity=True) == sac(s)

    def test_constant_stream(self):
        assert set(mean_sac(AnswerStream.from_answers("aaaa"), 10, 3).unique) == {1.0}

    def test_two_distinct(self):
        assert mean_sac(AnswerStream.from_answers("ab"), 20, 1).points == [(1, 1.0), (2, 2.0)]

    def test_seeded(self):
        s = AnswerStream.from_answers("abacbddefa")
        assert mean_sac(s, 30, 5) == mean_sac(s, 30, 5)

    def test_matches_rarefaction_expectation(self):
        # expected distinct count in a random k-subset (hypergeometric rarefaction)
        s = AnswerStream.from_answers(list("aaaaabbbcd"))
        curve = mean_sac(s, 4000, 2)
        counts, n = [5, 3, 1, 1], 10
        for k in (2, 5, 8):
            expected = sum(1 - math.comb(n - a, k) / math.comb(n, k) for a in counts)
            assert curve.unique[k - 1] == pytest.approx(expected, abs=0.05)


class TestSpline:
    def test_matches_scipy_natural(self):
        rng = np.random.default_rng(4)
        x = np.sort(rng.uniform(0, 20, 15))
        y = np.cumsum(rng.uniform(0, 2, 15))
        for bc in ("natural", "not-a-knot"):
            coef = spline.hermite_coefficients(x, y, spline.knot_slopes(x, y, bc))
            xx = np.linspace(x[0], x[-1], 500)
            assert np.allclose(spline.evaluate(x, coef, xx), CubicSpline(x, y, bc_type=bc)(xx), atol=1e-11)

    def test_not_a_knot_reproduces_cubic(self):
        x = np.arange(1.0, 101.0, 4.0)
        f = lambda t: 0.5 * t + 2e-3 * t**2 + 1e-5 * t**3
        coef = spline.hermite_coefficients(x, f(x), spline.knot_slopes(x, f(x), "not-a-knot"))
        xx = np.linspace(1, 97, 1000)
        assert np.max(np.abs(spline.evaluate(x, coef, xx) - f(xx))) < 1e-9

    def test_knots(self):
        assert knot_indices(10) == list(range(10))
        idx = knot_indices(103)
        assert idx[1] == 4 and idx[-1] == 102

    def test_too_short(self):
        with pytest.raises(ValueError):
            spline_fit(curve_of([1, 2, 3]))

    def test_interpolates_knots(self):
        s = simulate(ItemDistribution.uniform(50), WorkerModel(1, 300, without_replacement=False), seed=2).stream
        curve = mean_sac(s, 50, 1)
        model = spline_fit(curve)
        x = np.array(curve.hits, dtype=float)
        assert np.max(np.abs(model(x) - np.array(curve.unique))) <= 0.5

    def test_monotone_on_simulation(self):
        s = simulate(ItemDistribution.uniform(50), WorkerModel(1, 400, without_replacement=False), seed=8).stream
        model = spline_fit(mean_sac(s, 50, 1))
        xx = np.linspace(1, 400, 4000)
        assert np.all(np.diff(model(xx)) >= -1e-9)

    def test_repair_removes_dip(self):
        # a sharp step makes the natural spline overshoot and dip
        x = np.arange(8.0)
        y = np.array([0, 0, 0, 0, 5, 5, 5, 5.0])
        d = spline.monotone_slopes(x, y, spline.natural_slopes(x, y))
        coef = spline.hermite_coefficients(x, y, d)
        assert np.all(np.diff(spline.evaluate(x, coef, np.linspace(0, 7, 2000))) >= -1e-12)


class TestSplinePredict:
    def test_zero(self):
        model = spline_fit(curve_of(list(range(1, 41))))
        assert spline_predict(model, 40, 0).expected_new_uniques == 0.0

    def test_linear_curve(self):
        model = spline_fit(curve_of(list(range(1, 101))))
        assert model.end_slope == pytest.approx(1.0)
        assert spline_predict(model, 100, 20).expected_new_uniques == pytest.approx(20.0)
        assert spline_predict(model, 100, 20, "cubic").expected_new_uniques == pytest.approx(20.0)

    def test_plateau(self):
        values = [min(k, 30) for k in range(1, 101)]
        model = spline_fit(curve_of(values))
        assert spline_predict(model, 100, 10).expected_new_uniques == pytest.approx(0.0, abs=1e-9)

    def test_wrong_n(self):
        model = spline_fit(curve_of(list(range(1, 41))))
        with pytest.raises(ValueError):
            spline_predict(model, 39, 5)

    @pytest.mark.parametrize("extension", ["linear", "cubic"])
    def test_monotone_in_m(self, extension):
        s = simulate(ItemDistribution.zipf(192), WorkerModel(1, 300, without_replacement=False), seed=6).stream
        model = spline_fit(mean_sac(s, 50, 0))
        preds = [spline_predict(model, 300, m, extension).expected_new_uniques for m in range(0, 400, 7)]
        assert all(p >= 0 for p in preds)
        assert all(a <= b + 1e-12 for a, b in zip(preds, preds[1:]))


class TestTable:
    def test_rows_and_order(self):
        s = simulate(ItemDistribution.zipf(100), WorkerModel(1, 150, without_replacement=False), seed=1).stream
        rows = paygo_table(s, [10, 50], permutations=20, seed=3)
        assert [(r.method, r.m) for r in rows] == [("shen", 10), ("shen", 50), ("spline", 10), ("spline", 50)]
        assert paygo_table(s, [10, 50], 20, 3) == rows

    def test_early_predictions_richer_per_hit(self):
        s = simulate(ItemDistribution.zipf(192), WorkerModel(1, 800, without_replacement=False), seed=4).stream
        early = paygo_table(prefix(s, 100), [50], 30, 0)
        late = paygo_table(s, [50], 30, 0)
        for a, b in zip(early, late):
            assert a.expected_new_uniques > b.expected_new_uniques
