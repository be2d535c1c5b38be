"""Model-agnostic explanations: PDP, Shapley values, local surrogates, counterfactuals."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb, factorial

import numpy as np

from .errors import (
    AlreadyDesiredClass,
    FeatureOutOfRange,
    TooManyFeaturesForExact,
)

EXACT_SHAP_MAX_FEATURES = 12


@dataclass
class Explanation:
    method: str  # pdp | shap | lime | counterfactual
    instance: np.ndarray | None = None
    attributions: np.ndarray | None = None
    baseline: float | None = None
    grid: np.ndarray | None = None
    curve: np.ndarray | None = None
    feature_names: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)


def _model_output(model, X: np.ndarray, target_class: int | None = None) -> np.ndarray:
    """Scalar model output per row: probability of the selected class, or prediction."""
    if model.spec.task == "classification":
        proba = model.predict_proba(X)
        if target_class is None:
            target_class = proba.shape[1] - 1 if proba.shape[1] == 2 else 0
        return proba[:, target_class]
    return np.asarray(model.predict(X), dtype=np.float64)


def pdp(model, X, features, grid_points: int = 20,
        target_class: int | None = None) -> Explanation:
    """Partial dependence of one feature (curve) or a feature pair (surface)."""
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    if isinstance(features, int):
        features = (features,)
    features = tuple(features)
    if len(features) not in (1, 2):
        raise ValueError("pdp supports one feature or a pair")
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    for f in features:
        if not 0 <= f < X.shape[1]:
            raise FeatureOutOfRange(str(f))
    grids = [
        np.linspace(X[:, f].min(), X[:, f].max(), grid_points) for f in features
    ]
    if len(features) == 1:
        f = features[0]
        curve = np.empty(grid_points)
        for i, v in enumerate(grids[0]):
            Xv = X.copy()
            Xv[:, f] = v
            curve[i] = _model_output(model, Xv, target_class).mean()
        return Explanation(method="pdp", grid=grids[0], curve=curve,
                           metadata={"features": features})
    f1, f2 = features
    surface = np.empty((grid_points, grid_points))
    for i, v1 in enumerate(grids[0]):
        for j, v2 in enumerate(grids[1]):
            Xv = X.copy()
            Xv[:, f1] = v1
            Xv[:, f2] = v2
            surface[i, j] = _model_output(model, Xv, target_class).mean()
    return Explanation(method="pdp", grid=np.array(grids), curve=surface,
                       metadata={"features": features})


def _coalition_value(model, instance, background, subset, target_class) -> float:
    """v(S): mean model output with features in S taken from the instance."""
    rows = background.copy()
    if subset:
        rows[:, list(subset)] = instance[list(subset)]
    return float(_model_output(model, rows, target_class).mean())


def shap_values(model, instance, background, mode: str = "exact",
                seed: int = 0, target_class: int | None = None,
                n_coalitions: int | None = None) -> Explanation:
    """Shapley attributions with interventional feature replacement.

    exact: full 2^p coalition enumeration. sampled: KernelSHAP-style weighted
    least squares on sampled coalitions.
    """
    instance = np.asarray(getattr(instance, "values", instance), dtype=np.float64).ravel()
    background = np.asarray(getattr(background, "values", background), dtype=np.float64)
    p = instance.size
    baseline = _coalition_value(model, instance, background, (), target_class)
    full = _coalition_value(model, instance, background, tuple(range(p)), target_class)

    if mode == "exact":
        if p > EXACT_SHAP_MAX_FEATURES:
            raise TooManyFeaturesForExact(f"{p} > {EXACT_SHAP_MAX_FEATURES}")
        values: dict[frozenset, float] = {}
        for size in range(p + 1):
            for subset in combinations(range(p), size):
                values[frozenset(subset)] = _coalition_value(
                    model, instance, background, subset, target_class
                )
        phi = np.zeros(p)
        for j in range(p):
            others = [f for f in range(p) if f != j]
            for size in range(p):
                w = factorial(size) * factorial(p - size - 1) / factorial(p)
                for subset in combinations(others, size):
                    s = frozenset(subset)
                    phi[j] += w * (values[s | {j}] - values[s])
        return Explanation(
            method="shap", instance=instance, attributions=phi, baseline=baseline,
            metadata={"mode": "exact", "model_output": full},
        )

    # sampled KernelSHAP: weighted regression with the efficiency constraint
    if p == 1:
        return Explanation(
            method="shap", instance=instance, attributions=np.array([full - baseline]),
            baseline=baseline, metadata={"mode": "sampled", "model_output": full, "seed": seed},
        )
    rng = np.random.default_rng(seed)
    if n_coalitions is None:
        n_coalitions = max(2 ** min(p, 11), 2048)
    # coalitions drawn proportional to the Shapley kernel weight, so the
    # least squares below uses unit regression weights
    masks, targets = [], []
    sizes = np.arange(1, p)
    size_weights = np.array([(p - 1) / (comb(p, s) * s * (p - s)) for s in sizes])
    size_probs = size_weights / size_weights.sum()
    for _ in range(n_coalitions):
        s = int(rng.choice(sizes, p=size_probs))
        subset = tuple(rng.choice(p, size=s, replace=False))
        mask = np.zeros(p)
        mask[list(subset)] = 1.0
        masks.append(mask)
        targets.append(_coalition_value(model, instance, background, subset, target_class))
    M = np.array(masks)
    t = np.array(targets) - baseline
    # substitute phi_p = (full - baseline) - sum(other phis) to enforce efficiency
    delta = full - baseline
    A = M[:, :-1] - M[:, -1][:, None]
    b = t - M[:, -1] * delta
    G = A.T @ A + 1e-10 * np.eye(p - 1)
    phi_head = np.linalg.solve(G, A.T @ b)
    phi = np.concatenate([phi_head, [delta - phi_head.sum()]])
    return Explanation(
        method="shap", instance=instance, attributions=phi, baseline=baseline,
        metadata={"mode": "sampled", "model_output": full, "seed": seed,
                  "n_coalitions": n_coalitions},
    )


def lime_explain(model, instance, X_train, n_samples: int = 5000, seed: int = 0,
                 target_class: int | None = None) -> Explanation:
    """Ridge linear surrogate on Gaussian perturbations around the instance."""
    instance = np.asarray(getattr(instance, "values", instance), dtype=np.float64).ravel()
    X_train = np.asarray(getattr(X_train, "values", X_train), dtype=np.float64)
    p = instance.size
    if n_samples < p + 2:
        raise ValueError("n_samples must be at least n_features + 2")
    rng = np.random.default_rng(seed)
    scale = X_train.std(axis=0)
    scale[scale == 0.0] = 1.0
    samples = instance + rng.standard_normal((n_samples, p)) * scale
    outputs = _model_output(model, samples, target_class)
    if np.ptp(outputs) == 0.0:
        return Explanation(
            method="lime", instance=instance, attributions=np.zeros(p),
            baseline=float(outputs[0]),
            metadata={"fidelity_r2": 0.0, "degenerate": True, "seed": seed},
        )
    width = 0.75 * np.sqrt(p)
    d2 = np.sum(((samples - instance) / scale) ** 2, axis=1)
    w = np.exp(-d2 / width**2)
    A = np.column_stack([samples - instance, np.ones(n_samples)])
    W = w[:, None]
    G = A.T @ (W * A) + 1e-3 * np.eye(p + 1)
    coef = np.linalg.solve(G, A.T @ (w * outputs))
    pred = A @ coef
    ss_res = float(np.sum(w * (outputs - pred) ** 2))
    mean_w = float(np.sum(w * outputs) / np.sum(w))
    ss_tot = float(np.sum(w * (outputs - mean_w) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return Explanation(
        method="lime", instance=instance, attributions=coef[:p],
        baseline=float(coef[p]),
        metadata={"fidelity_r2": r2, "degenerate": False, "seed": seed},
    )


def counterfactual(model, instance, desired_class, X_train,
                   max_changed_features: int = 3, seed: int = 0,
                   grid_points: int = 50) -> Explanation:
    """Greedy grid search for a minimal prediction-flipping feature change.

    Scans single features first, then pairs, up to ``max_changed_features``
    features changed at once; distance is L1 normalized by feature ranges.
    """
    instance = np.asarray(getattr(instance, "values", instance), dtype=np.float64).ravel()
    X_train = np.asarray(getattr(X_train, "values", X_train), dtype=np.float64)
    p = instance.size
    current = model.predict(instance[None, :])[0]
    if current == desired_class:
        raise AlreadyDesiredClass(str(desired_class))
    lo, hi = X_train.min(axis=0), X_train.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    grids = [np.linspace(lo[j], hi[j], grid_points) for j in range(p)]

    def try_combo(features: tuple[int, ...]):
        """Best flipping candidate over the grid product for these features."""
        best = None
        stack = [()]
        for f in features:
            stack = [prefix + (v,) for prefix in stack for v in grids[f]]
        candidates = np.tile(instance, (len(stack), 1))
        for i, values in enumerate(stack):
            for f, v in zip(features, values):
                candidates[i, f] = v
        preds = model.predict(candidates)
        flipped = np.flatnonzero(preds == desired_class)
        for i in flipped:
            dist = float(np.sum(np.abs(candidates[i] - instance) / span))
            if best is None or dist < best[0]:
                best = (dist, candidates[i])
        return best

    for n_changed in range(1, max_changed_features + 1):
        best = None
        for features in combinations(range(p), n_changed):
            result = try_combo(features)
            if result and (best is None or result[0] < best[0]):
                best = result
        if best is not None:
            dist, point = best
            return Explanation(
                method="counterfactual", instance=instance, attributions=point - instance,
                metadata={
                    "found": True, "counterfactual": point, "distance": dist,
                    "desired_class": desired_class, "n_changed": n_changed,
                },
            )
    return Explanation(
        method="counterfactual", instance=instance,
        metadata={"found": False, "desired_class": desired_class},
    )
