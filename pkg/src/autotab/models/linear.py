"""Linear and logistic regression."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTarget
from .base import FittedModel, ModelSpec, check_xy, feature_names_of


class LinearRegressionModel(FittedModel):
    def __init__(self, spec, feature_names, weights: np.ndarray, intercept: float):
        super().__init__(spec, feature_names)
        self.weights = weights
        self.intercept = intercept

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        return X @ self.weights + self.intercept

    def learned_arrays(self) -> dict:
        return {"weights": self.weights, "intercept": self.intercept}


def fit_linear_regression(X, y, spec: ModelSpec) -> LinearRegressionModel:
    """Least squares with intercept via normal equations; ridge jitter if singular."""
    X, y = check_xy(X, y)
    n, p = X.shape
    if n < 2:
        raise DegenerateTarget("need at least 2 rows")
    A = np.column_stack([X, np.ones(n)])
    G = A.T @ A
    b = A.T @ y.astype(np.float64)
    try:
        coef = np.linalg.solve(G, b)
    except np.linalg.LinAlgError:
        coef = np.linalg.solve(G + 1e-8 * np.eye(p + 1), b)
    return LinearRegressionModel(spec, feature_names_of(X, p), coef[:p], float(coef[p]))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def logistic_loss_grad(w: np.ndarray, X: np.ndarray, t: np.ndarray,
                       l2: float) -> tuple[float, np.ndarray]:
    """L2-regularized binary log-loss and gradient; w includes the intercept last.

    The intercept is not regularized.
    """
    n = X.shape[0]
    A = np.column_stack([X, np.ones(n)])
    z = A @ w
    # log-loss via logaddexp for stability
    loss = float(np.mean(np.logaddexp(0.0, z) - t * z))
    loss += 0.5 * l2 * float(w[:-1] @ w[:-1])
    p = _sigmoid(z)
    grad = A.T @ (p - t) / n
    grad[:-1] += l2 * w[:-1]
    return loss, grad


def _minimize_logistic(X: np.ndarray, t: np.ndarray, l2: float = 1e-4,
                       tol: float = 1e-6, max_iter: int = 10_000) -> np.ndarray:
    """Gradient descent with backtracking line search on the log-loss."""
    w = np.zeros(X.shape[1] + 1)
    loss, grad = logistic_loss_grad(w, X, t, l2)
    step = 1.0
    for _ in range(max_iter):
        if np.max(np.abs(grad)) < tol:
            break
        step = min(step * 2.0, 1e4)
        g2 = float(grad @ grad)
        while True:
            trial = w - step * grad
            trial_loss, trial_grad = logistic_loss_grad(trial, X, t, l2)
            if trial_loss <= loss - 0.5 * step * g2 or step < 1e-16:
                break
            step *= 0.5
        w, loss, grad = trial, trial_loss, trial_grad
    return w


class LogisticRegressionModel(FittedModel):
    def __init__(self, spec, feature_names, classes, weights: np.ndarray,
                 intercepts: np.ndarray):
        super().__init__(spec, feature_names, classes)
        self.weights = weights      # (n_classes_or_1, p)
        self.intercepts = intercepts

    def decision_values(self, X) -> np.ndarray:
        X = self._check(X)
        return X @ self.weights.T + self.intercepts

    def predict_proba(self, X) -> np.ndarray:
        z = self.decision_values(X)
        if len(self.classes) == 2:
            p1 = _sigmoid(z[:, 0])
            return np.column_stack([1.0 - p1, p1])
        # one-vs-rest: normalize the per-class sigmoid scores
        scores = _sigmoid(z)
        total = scores.sum(axis=1, keepdims=True)
        total[total == 0.0] = 1.0
        return scores / total

    def learned_arrays(self) -> dict:
        return {"weights": self.weights, "intercepts": self.intercepts}


def fit_logistic_regression(X, y, spec: ModelSpec) -> LogisticRegressionModel:
    """L2-regularized logistic regression; multiclass via one-vs-rest."""
    X, y = check_xy(X, y)
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateTarget("logistic regression needs at least 2 classes")
    l2 = float(spec.param("l2", 1e-4))
    if classes.size == 2:
        t = (y == classes[1]).astype(np.float64)
        w = _minimize_logistic(X, t, l2)
        weights, intercepts = w[None, :-1], np.array([w[-1]])
    else:
        ws = []
        for c in classes:
            t = (y == c).astype(np.float64)
            ws.append(_minimize_logistic(X, t, l2))
        W = np.array(ws)
        weights, intercepts = W[:, :-1], W[:, -1]
    return LogisticRegressionModel(
        spec, feature_names_of(X, X.shape[1]), classes, weights, intercepts
    )
