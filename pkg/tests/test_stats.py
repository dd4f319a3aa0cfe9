import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from animqa.core import PUBLISHED_MODEL, FeatureVector, QualityModel
from animqa.errors import (
    InsufficientData,
    LengthMismatch,
    MalformedInput,
    NoRatings,
    RankDeficient,
    ZeroVariance,
)
from animqa.stats import (
    LabeledDataset,
    RatingTable,
    SplitConfig,
    compute_mos,
    evaluate,
    fit_model,
    mos_with_count,
    mse,
    plcc,
    predict,
    predict_clamped,
    rankdata,
    single_feature_srocc,
    solve_least_squares,
    split_indices,
    srocc,
)
from oracles import average_ranks, pearson_direct, spearman_direct

finite = st.floats(-1e3, 1e3, allow_nan=False)


def dataset(X, y, check_range=False):
    return LabeledDataset([f"s{i}" for i in range(len(y))], X, y, check_range)


class TestMOS:
    def test_constant(self):
        t = RatingTable((("a", f"r{i}", 1) for i in range(24)))
        assert mos_with_count(t, "a") == (1.0, 24)

    def test_mean(self):
        t = RatingTable(("a", f"r{i}", s) for i, s in enumerate([1, 2, 3, 4, 5]))
        assert compute_mos(t, "a") == 3.0

    def test_unknown(self):
        with pytest.raises(NoRatings):
            compute_mos(RatingTable([("a", "r", 3)]), "b")

    @pytest.mark.parametrize("score", [0, 6, 2.5, True])
    def test_bad_scores(self, score):
        with pytest.raises(MalformedInput):
            RatingTable([("a", "r", score)])

    def test_duplicate_rater(self):
        with pytest.raises(MalformedInput):
            RatingTable([("a", "r", 3), ("a", "r", 4)])


class TestPredict:
    def test_zero_vector(self):
        assert predict(PUBLISHED_MODEL, FeatureVector(*[0.0] * 7)) == 0.0

    def test_unit_projection(self):
        m = QualityModel((1, 0, 0, 0, 0, 0, 0))
        assert predict(m, FeatureVector(0.5, 9, 9, 9, 9, 9, 9)) == 0.5

    def test_published_all_ones(self):
        assert predict(PUBLISHED_MODEL, np.ones(7)) == pytest.approx(1.106, abs=1e-12)

    def test_clamped(self):
        assert predict_clamped(PUBLISHED_MODEL, np.zeros(7)) == 1.0
        assert predict_clamped(QualityModel((9, 0, 0, 0, 0, 0, 0)), np.ones(7)) == 5.0


class TestErrorMeasures:
    def test_mse(self):
        assert mse([1, 2], [1, 2]) == 0
        assert mse([1, 2], [1, 4]) == 2.0
        with pytest.raises(LengthMismatch):
            mse([1, 2], [1])

    def test_fixtures(self):
        assert plcc([1, 2, 3], [1, 3, 2])[0] == 0.5
        assert srocc([1, 2, 3], [1, 3, 2])[0] == 0.5
        assert 1 - 6 * 2 / (3 * 8) == 0.5

    def test_perfect(self, rng):
        x = rng.normal(size=20)
        assert plcc(x, 2 * x + 1)[0] == pytest.approx(1.0, abs=1e-15)
        assert plcc(x, -x)[0] == pytest.approx(-1.0, abs=1e-15)
        assert srocc(x, np.exp(x))[0] == 1.0

    def test_degenerate(self):
        with pytest.raises(ZeroVariance):
            srocc([1, 1, 1], [1, 2, 3])
        with pytest.raises(ZeroVariance):
            plcc([1, 2, 3], [4, 4, 4])
        with pytest.raises(LengthMismatch):
            plcc([1, 2], [1, 2])
        with pytest.raises(LengthMismatch):
            srocc([1, 2, 3], [1, 2])

    def test_ranks_average_ties(self):
        np.testing.assert_array_equal(rankdata([3, 1, 3, 2, 3]), [4, 1, 4, 2, 4])
        x = np.random.default_rng(0).integers(0, 5, 40)
        np.testing.assert_array_equal(rankdata(x), average_ranks(x))

    def test_t_pvalues_match_reference(self, rng):
        x, y = rng.normal(size=15), rng.normal(size=15)
        assert plcc(x, y)[1] == pytest.approx(sps.pearsonr(x, y)[1], rel=1e-9)
        assert srocc(x, y)[1] == pytest.approx(sps.spearmanr(x, y)[1], rel=1e-9)

    def test_exact_permutation_pvalue(self):
        r, p = srocc([1, 2, 3, 4], [1, 2, 3, 4], exact=True)
        assert r == 1.0 and p == pytest.approx(2 / 24)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(finite, finite), min_size=3, max_size=30))
    def test_oracle_and_symmetry(self, pairs):
        x = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            return
        r = srocc(x, y)[0]
        assert r == pytest.approx(spearman_direct(x, y), abs=1e-12)
        assert r == pytest.approx(srocc(y, x)[0], abs=1e-12)
        if np.std(x) > 1e-6 and np.std(y) > 1e-6:
            assert plcc(x, y)[0] == pytest.approx(pearson_direct(x.tolist(), y.tolist()), abs=1e-12)
            assert plcc(x, y)[0] == pytest.approx(plcc(3 * x + 7, 0.5 * y - 2)[0], abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-1000, 1000)), min_size=3, max_size=30))
    def test_srocc_monotone_invariance(self, pairs):
        # integers keep exp and cube strictly monotone in floating point
        x = np.array([p[0] for p in pairs], dtype=float) / 10
        y = np.array([p[1] for p in pairs], dtype=float)
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            return
        # monotone transforms preserve ranks exactly
        assert srocc(np.exp(x), y)[0] == srocc(x, y)[0]
        assert srocc(x, y**3)[0] == srocc(x, y)[0]


class TestDataset:
    def test_validation(self):
        with pytest.raises(MalformedInput):
            LabeledDataset(["a", "a"], np.zeros((2, 7)), [1, 2])
        with pytest.raises(MalformedInput):
            LabeledDataset(["a"], np.zeros((1, 7)), [6.0])
        assert len(LabeledDataset(["a"], np.zeros((1, 7)), [6.0], check_range=False)) == 1
        with pytest.raises(LengthMismatch):
            LabeledDataset(["a", "b"], np.zeros((2, 7)), [1.0])

    def test_split_partitions(self):
        for seed in range(5):
            tr, va = split_indices(37, SplitConfig(0.8, seed))
            assert len(tr) == 30 and len(va) == 7
            assert set(tr) | set(va) == set(range(37)) and not set(tr) & set(va)
            tr2, va2 = split_indices(37, SplitConfig(0.8, seed))
            assert np.array_equal(tr, tr2) and np.array_equal(va, va2)

    def test_split_fraction_bounds(self):
        with pytest.raises(ValueError):
            SplitConfig(1.0)


class TestFit:
    def test_planted_recovery(self, rng):
        X = np.abs(rng.normal(size=(60, 7)))
        w = np.array(PUBLISHED_MODEL.weights)
        fit = fit_model(dataset(X, X @ w))
        np.testing.assert_allclose(fit.model.weights, w, atol=1e-6)
        assert fit.ridge_lambda == 0.0
        assert fit.validation_mse == pytest.approx(0.0, abs=1e-12)
        model, val = fit
        assert model == fit.model

    def test_beats_zero_model(self, rng):
        X = rng.normal(size=(40, 7))
        y = rng.uniform(1, 5, 40)
        fit = fit_model(dataset(X, y), SplitConfig(0.8, 1))
        tr, _ = split_indices(40, SplitConfig(0.8, 1))
        assert fit.train_mse * len(tr) <= float(np.sum(y[tr] ** 2)) + 1e-12

    def test_five_rows(self, rng):
        with pytest.raises(InsufficientData):
            fit_model(dataset(rng.normal(size=(5, 7)), np.ones(5)))

    def test_rank_deficient_uses_ridge(self, rng):
        X = rng.normal(size=(30, 7))
        X[:, 6] = X[:, 5]
        fit = fit_model(dataset(X, rng.normal(size=30)))
        assert fit.ridge_lambda == 1e-8

    def test_all_zero_design(self):
        with pytest.raises(RankDeficient):
            solve_least_squares(np.zeros((10, 7)), np.ones(10), ridge=0.0)

    def test_intercept_flag(self, rng):
        X = rng.normal(size=(50, 7))
        y = X @ np.arange(7.0) + 2.5
        fit = fit_model(dataset(X, y), intercept=True)
        assert fit.model.intercept == pytest.approx(2.5, abs=1e-9)


class TestEvaluate:
    def test_perfect_model(self, rng):
        X = rng.normal(size=(12, 7))
        m = QualityModel(rng.normal(size=7))
        rep = evaluate(m, dataset(X, X @ np.array(m.weights)))
        assert rep.mse == pytest.approx(0.0, abs=1e-20)
        assert rep.plcc == pytest.approx(1.0, abs=1e-12) and rep.srocc == 1.0
        d = rep.to_dict()
        assert set(d) == {"mse", "plcc", "srocc", "p_values", "n"}

    def test_single_feature_analysis(self, rng):
        X = rng.normal(size=(20, 7))
        X[:, 3] = 0.0
        out = single_feature_srocc(dataset(X, X[:, 0]))
        assert out["f1"][0] == 1.0
        assert np.isnan(out["f4"][0])
