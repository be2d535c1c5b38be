"""k-nearest-neighbors classifier and regressor."""

from __future__ import annotations

import numpy as np

from ..errors import KTooLarge
from .base import FittedModel, ModelSpec, check_xy, feature_names_of


class KNNModel(FittedModel):
    def __init__(self, spec, feature_names, classes, X_train, y_train, k: int):
        super().__init__(spec, feature_names, classes)
        self.X_train = X_train
        self.y_train = y_train
        self.k = k

    def _neighbor_indices(self, X: np.ndarray) -> np.ndarray:
        d2 = (
            np.sum(X**2, axis=1)[:, None]
            + np.sum(self.X_train**2, axis=1)[None, :]
            - 2.0 * X @ self.X_train.T
        )
        # stable argsort breaks distance ties by smaller training-row index
        return np.argsort(np.round(d2, 12), axis=1, kind="stable")[:, : self.k]

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        idx = self._neighbor_indices(X)
        n_classes = len(self.classes)
        proba = np.zeros((X.shape[0], n_classes))
        class_pos = {c: i for i, c in enumerate(self.classes)}
        for r in range(X.shape[0]):
            for i in idx[r]:
                proba[r, class_pos[self.y_train[i]]] += 1.0
        return proba / self.k

    def predict(self, X) -> np.ndarray:
        if self.spec.task == "classification":
            proba = self.predict_proba(X)
            # argmax takes the first maximum: vote ties go to the smallest class index
            return self.classes[np.argmax(proba, axis=1)]
        X = self._check(X)
        idx = self._neighbor_indices(X)
        return self.y_train[idx].mean(axis=1)

    def learned_arrays(self) -> dict:
        return {"X_train": self.X_train, "y_train": self.y_train, "k": self.k}


def fit_knn(X, y, spec: ModelSpec) -> KNNModel:
    X, y = check_xy(X, y)
    k = int(spec.param("k", 5))
    if not 1 <= k <= X.shape[0]:
        raise KTooLarge(f"k={k} with {X.shape[0]} training rows")
    classes = np.unique(y) if spec.task == "classification" else None
    return KNNModel(spec, feature_names_of(X, X.shape[1]), classes, X, y, k)
