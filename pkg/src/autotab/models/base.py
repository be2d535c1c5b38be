"""Shared model interfaces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch


@dataclass(frozen=True)
class ModelSpec:
    algorithm: str
    task: str  # classification | regression
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def with_params(self, **overrides) -> "ModelSpec":
        params = dict(self.hyperparameters)
        params.update(overrides)
        return ModelSpec(self.algorithm, self.task, params, self.seed)

    def param(self, name: str, default=None):
        return self.hyperparameters.get(name, default)


class FittedModel:
    """Trained model: deterministic predict / predict_proba."""

    def __init__(self, spec: ModelSpec, feature_names: tuple[str, ...],
                 classes: np.ndarray | None = None):
        self.spec = spec
        self.feature_names = tuple(feature_names)
        self.classes = classes  # encoded class indices, classification only

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(getattr(X, "values", X), dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        if self.spec.task == "classification":
            proba = self.predict_proba(X)
            return self.classes[np.argmax(proba, axis=1)]
        raise NotImplementedError

    def decision_values(self, X) -> np.ndarray:  # pragma: no cover - optional hook
        raise NotImplementedError

    def learned_arrays(self) -> dict:
        """Arrays/parameters for self-describing JSON serialization."""
        return {}

    def to_jsonable(self) -> dict:
        def conv(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            return v
        return {
            "algorithm": self.spec.algorithm,
            "task": self.spec.task,
            "hyperparameters": conv(self.spec.hyperparameters),
            "seed": self.spec.seed,
            "feature_names": list(self.feature_names),
            "classes": conv(self.classes) if self.classes is not None else None,
            "learned": conv(self.learned_arrays()),
        }


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} rows vs {y.shape[0]} labels")
    return X, y


def feature_names_of(X, p: int) -> tuple[str, ...]:
    names = getattr(X, "feature_names", None)
    return tuple(names) if names is not None else tuple(f"f{j}" for j in range(p))
