"""Soft-margin linear SVM trained with the Pegasos subgradient schedule."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTarget
from .base import FittedModel, ModelSpec, check_xy, feature_names_of, softmax


def _pegasos(X: np.ndarray, t: np.ndarray, lam: float, n_iter: int,
             rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Binary Pegasos on hinge loss; t in {-1, +1}. Returns (w, b)."""
    n, p = X.shape
    w = np.zeros(p)
    b = 0.0
    for it in range(1, n_iter + 1):
        i = int(rng.integers(0, n))
        eta = 1.0 / (lam * it)
        margin = t[i] * (X[i] @ w + b)
        w *= 1.0 - eta * lam
        if margin < 1.0:
            w += eta * t[i] * X[i]
            b += eta * t[i]
    return w, b


class SVMModel(FittedModel):
    def __init__(self, spec, feature_names, classes, weights, intercepts):
        super().__init__(spec, feature_names, classes)
        self.weights = weights      # (n_binary_problems, p)
        self.intercepts = intercepts

    def decision_values(self, X) -> np.ndarray:
        X = self._check(X)
        return X @ self.weights.T + self.intercepts

    def predict_proba(self, X) -> np.ndarray:
        z = self.decision_values(X)
        if len(self.classes) == 2:
            # squash the single margin through a logistic link
            p1 = 1.0 / (1.0 + np.exp(-np.clip(z[:, 0], -500, 500)))
            return np.column_stack([1.0 - p1, p1])
        return softmax(z)

    def predict(self, X) -> np.ndarray:
        z = self.decision_values(X)
        if len(self.classes) == 2:
            return self.classes[(z[:, 0] > 0).astype(int)]
        return self.classes[np.argmax(z, axis=1)]

    def learned_arrays(self) -> dict:
        return {"weights": self.weights, "intercepts": self.intercepts}


def fit_svm(X, y, spec: ModelSpec) -> SVMModel:
    """Linear SVM; multiclass via one-vs-rest, each with a seed-derived RNG."""
    X, y = check_xy(X, y)
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateTarget("svm needs at least 2 classes")
    lam = float(spec.param("lam", 1e-2))
    n_iter = int(spec.param("n_iter_factor", 20)) * X.shape[0]
    problems = [(classes[1],)] if classes.size == 2 else [(c,) for c in classes]
    weights, intercepts = [], []
    for idx, (positive,) in enumerate(problems):
        t = np.where(y == positive, 1.0, -1.0)
        rng = np.random.default_rng(spec.seed ^ (idx + 1))
        w, b = _pegasos(X, t, lam, n_iter, rng)
        weights.append(w)
        intercepts.append(b)
    return SVMModel(
        spec, feature_names_of(X, X.shape[1]), classes,
        np.array(weights), np.array(intercepts),
    )
