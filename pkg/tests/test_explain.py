from itertools import combinations
from math import factorial

import numpy as np
import pytest

from autotab.errors import AlreadyDesiredClass, FeatureOutOfRange, TooManyFeaturesForExact
from autotab.explain import counterfactual, lime_explain, pdp, shap_values
from autotab.models.base import ModelSpec
from conftest import fit_simple, make_blobs


class FunctionModel:
    """Regression-style model wrapping an arbitrary row function."""

    def __init__(self, fn):
        self.fn = fn
        self.spec = ModelSpec(algorithm="linear_regression", task="regression",
                              hyperparameters={}, seed=0)

    def predict(self, X):
        return np.apply_along_axis(self.fn, 1, np.asarray(X, dtype=np.float64))


class ThresholdClassifier:
    """1[x_0 > threshold] two-class model."""

    def __init__(self, threshold=0.0):
        self.threshold = threshold
        self.spec = ModelSpec(algorithm="knn", task="classification",
                              hyperparameters={}, seed=0)

    def predict(self, X):
        return (np.asarray(X)[:, 0] > self.threshold).astype(int)

    def predict_proba(self, X):
        pred = self.predict(X)
        return np.column_stack([1 - pred, pred]).astype(float)


def brute_force_shapley(value_fn, p):
    """Second, independent Shapley enumeration over permutation marginals."""
    from itertools import permutations
    phi = np.zeros(p)
    perms = list(permutations(range(p)))
    for order in perms:
        seen = []
        for j in order:
            before = value_fn(tuple(sorted(seen)))
            seen.append(j)
            after = value_fn(tuple(sorted(seen)))
            phi[j] += after - before
    return phi / len(perms)


def coalition_value(model, instance, background, subset):
    rows = background.copy()
    rows[:, list(subset)] = instance[list(subset)]
    return float(np.mean(model.predict(rows)))


class TestPDP:
    def test_identity_feature(self):
        model = FunctionModel(lambda r: r[0])
        X = np.random.default_rng(0).normal(size=(30, 2))
        e = pdp(model, X, 0)
        np.testing.assert_allclose(e.curve, e.grid, atol=1e-12)

    def test_ignored_feature_constant(self):
        model = FunctionModel(lambda r: r[1])
        X = np.random.default_rng(1).normal(size=(30, 2))
        e = pdp(model, X, 0)
        assert e.curve.max() - e.curve.min() < 1e-9
        assert e.curve[0] == pytest.approx(X[:, 1].mean(), abs=1e-12)

    def test_grid_endpoints(self):
        X = np.random.default_rng(2).normal(size=(20, 2))
        e = pdp(FunctionModel(lambda r: r[0]), X, 0)
        assert e.grid[0] == X[:, 0].min()
        assert e.grid[-1] == X[:, 0].max()
        assert e.grid.size == 20

    def test_two_feature_surface(self):
        X = np.random.default_rng(3).normal(size=(15, 3))
        e = pdp(FunctionModel(lambda r: r[0] + r[1]), X, (0, 1), grid_points=5)
        assert e.curve.shape == (5, 5)

    def test_feature_out_of_range(self):
        X = np.zeros((5, 2))
        with pytest.raises(FeatureOutOfRange):
            pdp(FunctionModel(lambda r: 0.0), X, 7)


class TestShap:
    def test_matches_brute_force_enumeration(self):
        rng = np.random.default_rng(4)
        for p in (2, 3, 4, 5):
            w = rng.normal(size=p)
            model = FunctionModel(lambda r, w=w: float(np.tanh(r @ w)))
            instance = rng.normal(size=p)
            background = rng.normal(size=(8, p))
            e = shap_values(model, instance, background, mode="exact")
            oracle = brute_force_shapley(
                lambda s: coalition_value(model, instance, background, s), p)
            np.testing.assert_allclose(e.attributions, oracle, atol=1e-9)

    def test_linear_closed_form(self):
        rng = np.random.default_rng(5)
        p = 4
        w = rng.normal(size=p)
        model = FunctionModel(lambda r, w=w: float(r @ w) + 2.0)
        instance = rng.normal(size=p)
        background = rng.normal(size=(10, p))
        e = shap_values(model, instance, background, mode="exact")
        expected = w * (instance - background.mean(axis=0))
        np.testing.assert_allclose(e.attributions, expected, atol=1e-6)

    def test_efficiency(self):
        rng = np.random.default_rng(6)
        model = FunctionModel(lambda r: float(np.sin(r[0]) + r[1] ** 2))
        instance = rng.normal(size=2)
        background = rng.normal(size=(6, 2))
        e = shap_values(model, instance, background, mode="exact")
        out = model.predict(instance[None, :])[0]
        assert e.baseline + e.attributions.sum() == pytest.approx(out, abs=1e-6)

    def test_symmetry_axiom(self):
        model = FunctionModel(lambda r: r[0] + r[1])
        instance = np.array([1.0, 1.0])
        background = np.array([[0.0, 0.0], [2.0, 2.0]])
        e = shap_values(model, instance, background, mode="exact")
        assert e.attributions[0] == pytest.approx(e.attributions[1], abs=1e-9)

    def test_exact_mode_feature_cap(self):
        with pytest.raises(TooManyFeaturesForExact):
            shap_values(FunctionModel(lambda r: 0.0), np.zeros(13),
                        np.zeros((2, 13)), mode="exact")

    def test_sampled_efficiency_and_determinism(self):
        rng = np.random.default_rng(7)
        w = rng.normal(size=6)
        model = FunctionModel(lambda r, w=w: float(r @ w))
        instance = rng.normal(size=6)
        background = rng.normal(size=(10, 6))
        a = shap_values(model, instance, background, mode="sampled", seed=1,
                        n_coalitions=512)
        b = shap_values(model, instance, background, mode="sampled", seed=1,
                        n_coalitions=512)
        np.testing.assert_array_equal(a.attributions, b.attributions)
        out = model.predict(instance[None, :])[0]
        assert a.baseline + a.attributions.sum() == pytest.approx(out, abs=1e-6)

    def test_sampled_close_to_exact_linear(self):
        rng = np.random.default_rng(8)
        w = rng.normal(size=5)
        model = FunctionModel(lambda r, w=w: float(r @ w))
        instance = rng.normal(size=5)
        background = rng.normal(size=(8, 5))
        exact = shap_values(model, instance, background, mode="exact")
        sampled = shap_values(model, instance, background, mode="sampled", seed=0)
        np.testing.assert_allclose(sampled.attributions, exact.attributions, atol=0.05)


class TestLime:
    def test_recovers_linear_direction(self):
        model = FunctionModel(lambda r: 3.0 * r[0] - 2.0 * r[1])
        X_train = np.random.default_rng(9).normal(size=(100, 2))
        e = lime_explain(model, np.array([0.5, -0.5]), X_train, n_samples=5000, seed=0)
        target = np.array([3.0, -2.0])
        cos = e.attributions @ target / (
            np.linalg.norm(e.attributions) * np.linalg.norm(target))
        assert cos >= 0.99
        assert e.metadata["fidelity_r2"] > 0.99

    def test_constant_model_degenerate(self):
        model = FunctionModel(lambda r: 1.0)
        X_train = np.random.default_rng(10).normal(size=(50, 2))
        e = lime_explain(model, np.zeros(2), X_train, n_samples=200, seed=0)
        np.testing.assert_array_equal(e.attributions, np.zeros(2))
        assert e.metadata["degenerate"] is True

    def test_seed_determinism(self):
        model = FunctionModel(lambda r: r[0] ** 2)
        X_train = np.random.default_rng(11).normal(size=(50, 2))
        a = lime_explain(model, np.ones(2), X_train, n_samples=300, seed=4)
        b = lime_explain(model, np.ones(2), X_train, n_samples=300, seed=4)
        np.testing.assert_array_equal(a.attributions, b.attributions)


class TestCounterfactual:
    def test_threshold_flip_is_grid_minimal(self):
        model = ThresholdClassifier(0.0)
        X_train = np.column_stack([np.linspace(-1, 1, 50), np.linspace(-1, 1, 50)])
        instance = np.array([-0.3, 0.0])
        e = counterfactual(model, instance, desired_class=1, X_train=X_train)
        assert e.metadata["found"]
        point = e.metadata["cf" if "cf" in e.metadata else "counterfactual"]
        assert point[0] > 0.0
        # exhaustive single-feature scan for the true grid minimum
        grid = np.linspace(-1, 1, 50)
        flips = grid[grid > 0.0]
        best = np.min(np.abs(flips - instance[0]) / 2.0)  # span = 2 per feature
        assert e.metadata["distance"] == pytest.approx(best, abs=1e-12)

    def test_counterfactual_prediction_is_desired(self):
        X, y = make_blobs(20, [(-3.0, 0.0), (3.0, 0.0)], 0.8, seed=12)
        model = fit_simple("logistic_regression", X, y)
        idx = int(np.flatnonzero(model.predict(X) == 0)[0])
        e = counterfactual(model, X[idx], desired_class=1, X_train=X)
        assert e.metadata["found"]
        assert model.predict(e.metadata["counterfactual"][None, :])[0] == 1

    def test_unreachable_class_not_found(self):
        model = ThresholdClassifier(1e9)  # never predicts 1 on the data range
        X_train = np.random.default_rng(13).normal(size=(20, 2))
        e = counterfactual(model, X_train[0], desired_class=1, X_train=X_train)
        assert e.metadata["found"] is False

    def test_already_desired(self):
        model = ThresholdClassifier(0.0)
        X_train = np.random.default_rng(14).normal(size=(20, 2))
        with pytest.raises(AlreadyDesiredClass):
            counterfactual(model, np.array([5.0, 0.0]), desired_class=1,
                           X_train=X_train)
