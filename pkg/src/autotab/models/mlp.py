"""Fully-connected network for tabular data with a from-scratch backprop loop."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTarget
from .base import FittedModel, ModelSpec, check_xy, feature_names_of, softmax


def init_layers(sizes: list[int], rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    """Xavier-uniform weight initialization; biases start at zero."""
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        W = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        layers.append((W, np.zeros(fan_out)))
    return layers


def forward(layers, X: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Return the output layer pre-activation and all layer activations."""
    activations = [X]
    h = X
    for i, (W, b) in enumerate(layers):
        z = h @ W + b
        if i < len(layers) - 1:
            h = np.maximum(z, 0.0)
            activations.append(h)
        else:
            return z, activations
    return h, activations  # no layers: identity (unused in practice)


def loss_and_gradients(layers, X, target, task: str):
    """Cross-entropy (classification, one-hot target) or mean squared loss.

    Returns (loss, [(dW, db), ...]) matching the layer list.
    """
    z, activations = forward(layers, X)
    n = X.shape[0]
    if task == "classification":
        prob = softmax(z)
        loss = float(-np.mean(np.log(np.clip(prob[target.astype(bool)], 1e-12, 1.0))))
        delta = (prob - target) / n
    else:
        diff = z[:, 0] - target
        loss = float(np.mean(diff**2))
        delta = (2.0 * diff / n)[:, None]
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        a = activations[i]
        grads[i] = (a.T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ W.T) * (activations[i] > 0.0)
    return loss, grads


class MLPModel(FittedModel):
    def __init__(self, spec, feature_names, classes, layers, loss_trace):
        super().__init__(spec, feature_names, classes)
        self.layers = layers
        self.loss_trace = loss_trace

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        z, _ = forward(self.layers, X)
        return softmax(z)

    def predict(self, X) -> np.ndarray:
        if self.spec.task == "classification":
            return super().predict(X)
        X = self._check(X)
        z, _ = forward(self.layers, X)
        return z[:, 0]

    def learned_arrays(self) -> dict:
        return {
            "weights": [W for W, _ in self.layers],
            "biases": [b for _, b in self.layers],
        }


def fit_mlp(X, y, spec: ModelSpec) -> MLPModel:
    """Mini-batch gradient descent; defaults: one hidden layer of 32 ReLU units,
    batch 32, learning rate 1e-2, 200 epochs."""
    X, y = check_xy(X, y)
    n, p = X.shape
    if n < 2:
        raise DegenerateTarget("need at least 2 rows")
    hidden = list(spec.param("hidden_layers", [32]))
    lr = float(spec.param("learning_rate", 1e-2))
    epochs = int(spec.param("epochs", 200))
    batch = int(spec.param("batch_size", 32))
    rng = np.random.default_rng(spec.seed)
    if spec.task == "classification":
        classes = np.unique(y)
        if classes.size < 2:
            raise DegenerateTarget("mlp classification needs at least 2 classes")
        y_idx = np.searchsorted(classes, y)
        target = np.zeros((n, classes.size))
        target[np.arange(n), y_idx] = 1.0
        out_dim = classes.size
    else:
        classes = None
        target = y.astype(np.float64)
        out_dim = 1
    layers = init_layers([p] + hidden + [out_dim], rng)
    trace: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            tgt = target[rows] if spec.task == "classification" else target[rows]
            _, grads = loss_and_gradients(layers, X[rows], tgt, spec.task)
            layers = [
                (W - lr * dW, b - lr * db)
                for (W, b), (dW, db) in zip(layers, grads)
            ]
        epoch_loss, _ = loss_and_gradients(layers, X, target, spec.task)
        trace.append(epoch_loss)
    return MLPModel(spec, feature_names_of(X, p), classes, layers, trace)
