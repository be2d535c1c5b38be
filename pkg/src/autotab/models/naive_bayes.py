"""Gaussian naive Bayes."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTarget
from .base import FittedModel, ModelSpec, check_xy, feature_names_of


class GaussianNBModel(FittedModel):
    def __init__(self, spec, feature_names, classes, priors, means, variances):
        super().__init__(spec, feature_names, classes)
        self.priors = priors
        self.means = means        # (n_classes, p)
        self.variances = variances

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        log_post = np.empty((X.shape[0], len(self.classes)))
        for c in range(len(self.classes)):
            log_like = -0.5 * np.sum(
                np.log(2.0 * np.pi * self.variances[c])
                + (X - self.means[c]) ** 2 / self.variances[c],
                axis=1,
            )
            log_post[:, c] = np.log(self.priors[c]) + log_like
        m = log_post.max(axis=1, keepdims=True)
        p = np.exp(log_post - m)
        return p / p.sum(axis=1, keepdims=True)

    def learned_arrays(self) -> dict:
        return {"priors": self.priors, "means": self.means, "variances": self.variances}


def fit_naive_bayes(X, y, spec: ModelSpec) -> GaussianNBModel:
    """Per-class Gaussian fit; variances floored at 1e-9 of the largest feature variance."""
    X, y = check_xy(X, y)
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateTarget("naive bayes needs at least 2 classes")
    n, p = X.shape
    floor = 1e-9 * max(float(X.var(axis=0).max()), 1e-12)
    priors = np.empty(classes.size)
    means = np.empty((classes.size, p))
    variances = np.empty((classes.size, p))
    for c, cls in enumerate(classes):
        rows = X[y == cls]
        priors[c] = rows.shape[0] / n
        means[c] = rows.mean(axis=0)
        variances[c] = np.maximum(rows.var(axis=0), floor)
    return GaussianNBModel(spec, feature_names_of(X, p), classes, priors, means, variances)
