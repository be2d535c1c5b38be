import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from autotab.errors import EmptyMatrix, MinorityTooSmall, SingleClass
from autotab.preprocess import (
    SamplerSpec,
    fit_scaler,
    oversample,
    quantile,
    transform,
    yeo_johnson,
)


def col(*values):
    return np.asarray(values, dtype=np.float64).reshape(-1, 1)


class TestQuantile:
    def test_linear_interpolation_rule(self):
        v = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        assert quantile(v, 0.25) == 2.0
        assert quantile(v, 0.75) == 4.0

    def test_median_of_even_count(self):
        assert quantile(np.array([1.0, 2.0, 3.0, 4.0]), 0.5) == 2.5


class TestStandard:
    def test_population_std(self):
        params = fit_scaler(col(1, 2, 3), "standard")
        assert params.mean[0] == pytest.approx(2.0, abs=1e-12)
        assert params.std[0] == pytest.approx(np.sqrt(2.0 / 3.0), abs=1e-12)

    def test_transform_values(self):
        params = fit_scaler(col(1, 2, 3), "standard")
        out = transform(col(1, 2, 3), params).values.ravel()
        np.testing.assert_allclose(out, [-1.22474487, 0.0, 1.22474487], atol=1e-8)

    def test_fit_data_standardized(self):
        rng = np.random.default_rng(3)
        X = rng.normal(2.0, 5.0, (40, 3))
        out = transform(X, fit_scaler(X, "standard")).values
        assert np.max(np.abs(out.mean(axis=0))) < 1e-9
        assert np.max(np.abs(out.std(axis=0) - 1.0)) < 1e-9

    def test_constant_column_identity(self):
        params = fit_scaler(col(5, 5, 5), "standard")
        out = transform(col(5, 5, 5), params).values.ravel()
        np.testing.assert_array_equal(out, [5, 5, 5])

    def test_empty_matrix(self):
        with pytest.raises(EmptyMatrix):
            fit_scaler(np.empty((0, 2)), "standard")


class TestRobust:
    def test_median_and_iqr(self):
        params = fit_scaler(col(1, 2, 3, 4, 5), "robust")
        assert params.median[0] == 3.0
        assert params.iqr[0] == 2.0

    def test_transform(self):
        params = fit_scaler(col(1, 2, 3, 4, 5), "robust")
        out = transform(col(5,), params).values.ravel()
        assert out[0] == pytest.approx(1.0, abs=1e-12)


class TestUnitNorm:
    def test_three_four_five(self):
        X = np.array([[3.0, 4.0]])
        out = transform(X, fit_scaler(X, "unit_norm")).values
        np.testing.assert_allclose(out, [[0.6, 0.8]], atol=1e-12)

    def test_zero_row_unchanged(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0]])
        out = transform(X, fit_scaler(X, "unit_norm")).values
        np.testing.assert_array_equal(out[0], [0.0, 0.0])


class TestQuantileTransform:
    def test_own_fit_data_is_ranks(self):
        X = col(10, 20, 30, 40)
        out = transform(X, fit_scaler(X, "quantile")).values.ravel()
        np.testing.assert_allclose(out, [0.0, 1 / 3, 2 / 3, 1.0], atol=1e-12)

    def test_out_of_range_clipped(self):
        X = col(10, 20, 30, 40)
        params = fit_scaler(X, "quantile")
        out = transform(col(0, 100), params).values.ravel()
        assert out[0] == 0.0 and out[1] == 1.0


class TestPower:
    def test_lambda_one_is_identity(self):
        x = np.array([-3.0, -0.5, 0.0, 0.7, 4.0])
        np.testing.assert_allclose(yeo_johnson(x, 1.0), x, atol=1e-9)

    def test_lambda_zero_positive_branch(self):
        x = np.array([1.0, 2.0])
        np.testing.assert_allclose(yeo_johnson(x, 0.0), np.log1p(x), atol=1e-12)

    def test_reduces_skew(self):
        rng = np.random.default_rng(0)
        X = np.exp(rng.normal(0, 1, (200, 1)))  # log-normal, heavy right skew
        out = transform(X, fit_scaler(X, "power")).values.ravel()
        raw_skew = abs(float(((X - X.mean()) ** 3).mean() / X.std() ** 3))
        out_skew = abs(float(((out - out.mean()) ** 3).mean() / out.std() ** 3))
        assert out_skew < raw_skew

    def test_standardized_after_transform(self):
        rng = np.random.default_rng(1)
        X = rng.gamma(2.0, 2.0, (100, 2))
        out = transform(X, fit_scaler(X, "power")).values
        assert np.max(np.abs(out.mean(axis=0))) < 1e-9


class TestOversample:
    def test_random_duplicates_minority(self):
        X = np.arange(8, dtype=np.float64).reshape(4, 2)
        y = np.array([0, 0, 0, 1])
        Xo, yo = oversample(X, y, SamplerSpec(method="random", seed=0))
        assert Xo.shape[0] == 6
        counts = {c: int((yo == c).sum()) for c in (0, 1)}
        assert counts == {0: 3, 1: 3}
        for row in Xo[4:]:
            np.testing.assert_array_equal(row, X[3])

    def test_smote_on_segment(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 6.0],
                      [7.0, 7.0], [8.0, 8.0]])
        y = np.array([1, 1, 0, 0, 0, 0])
        Xo, yo = oversample(X, y, SamplerSpec(method="smote", k_neighbors=1, seed=3))
        for row in Xo[6:]:
            # on the segment between (0,0) and (1,1)
            assert row[0] == pytest.approx(row[1], abs=1e-12)
            assert 0.0 <= row[0] <= 1.0

    def test_balanced_input_identity(self):
        X = np.arange(8, dtype=np.float64).reshape(4, 2)
        y = np.array([0, 0, 1, 1])
        Xo, yo = oversample(X, y, SamplerSpec(method="random", seed=0))
        np.testing.assert_array_equal(Xo, X)
        np.testing.assert_array_equal(yo, y)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClass):
            oversample(np.zeros((3, 1)), np.array([1, 1, 1]),
                       SamplerSpec(method="random"))

    def test_smote_minority_too_small(self):
        X = np.zeros((4, 1))
        y = np.array([0, 0, 0, 1])
        with pytest.raises(MinorityTooSmall):
            oversample(X, y, SamplerSpec(method="smote", k_neighbors=5))

    def test_seed_determinism(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(20, 3))
        y = np.array([0] * 14 + [1] * 6)
        spec = SamplerSpec(method="smote", k_neighbors=3, seed=11)
        a = oversample(X, y, spec)
        b = oversample(X, y, spec)
        np.testing.assert_array_equal(a[0], b[0])


@settings(deadline=None, max_examples=40)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1),
       st.integers(min_value=3, max_value=12),
       st.integers(min_value=13, max_value=30))
def test_smote_convex_combination_property(seed, n_min, n_maj):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n_min, 3)), rng.normal(5, 1, (n_maj, 3))])
    y = np.array([1] * n_min + [0] * n_maj)
    Xo, yo = oversample(X, y, SamplerSpec(method="smote", k_neighbors=2, seed=seed))
    assert int((yo == 0).sum()) == int((yo == 1).sum()) == n_maj
    minority = X[:n_min]
    for row in Xo[len(X):]:
        # residual of the best convex combination over all minority pairs
        best = np.inf
        for i in range(n_min):
            for j in range(n_min):
                if i == j:
                    continue
                a, b = minority[i], minority[j]
                d = b - a
                denom = float(d @ d)
                u = 0.0 if denom == 0 else float(np.clip((row - a) @ d / denom, 0, 1))
                best = min(best, float(np.linalg.norm(a + u * d - row)))
        assert best < 1e-9
