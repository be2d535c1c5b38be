"""Model catalog: preset defaults, dimension-aware specs, and fit dispatch."""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from ..errors import UnknownAlgorithmName
from .base import FittedModel, ModelSpec
from .ensemble import fit_decision_tree, fit_gradient_boosting, fit_random_forest
from .knn import fit_knn
from .linear import fit_linear_regression, fit_logistic_regression
from .mlp import fit_mlp
from .naive_bayes import fit_naive_bayes
from .svm import fit_svm

_FITTERS = {
    "linear_regression": fit_linear_regression,
    "logistic_regression": fit_logistic_regression,
    "svm": fit_svm,
    "knn": fit_knn,
    "naive_bayes": fit_naive_bayes,
    "random_forest": fit_random_forest,
    "gradient_boosting": fit_gradient_boosting,
    "mlp": fit_mlp,
    "decision_tree": fit_decision_tree,  # building block, not in the default catalog
}


def load_catalog() -> dict:
    """The versioned hyperparameter catalog shipped with the package."""
    text = resources.files("autotab").joinpath("data/model_catalog.json").read_text()
    return json.loads(text)


def default_grid(algorithm: str) -> dict:
    return dict(load_catalog()["algorithms"][algorithm].get("grid", {}))


def get_models(
    task: str,
    n_rows: int,
    n_features: int,
    user_selection: list[str] | None = None,
    seed: int = 0,
) -> list[ModelSpec]:
    """Catalog specs for a task, with dimension-aware hyperparameter defaults."""
    catalog = load_catalog()["algorithms"]
    if user_selection is not None:
        unknown = [a for a in user_selection if a not in catalog]
        if unknown:
            raise UnknownAlgorithmName(", ".join(unknown))
        names = list(user_selection)
    else:
        names = [a for a, info in catalog.items() if task in info["tasks"]]
    specs = []
    for name in names:
        info = catalog[name]
        if task not in info["tasks"]:
            raise UnknownAlgorithmName(f"{name} does not support task {task!r}")
        params = dict(info["defaults"])
        if name == "random_forest":
            if task == "classification":
                params["max_features"] = int(np.ceil(np.sqrt(n_features)))
            else:
                params["max_features"] = int(np.ceil(n_features / 3))
        if name == "knn":
            params["k"] = min(params.get("k", 5), max(1, n_rows))
        specs.append(ModelSpec(algorithm=name, task=task,
                               hyperparameters=params, seed=seed))
    return specs


def fit(X, y, spec: ModelSpec) -> FittedModel:
    try:
        fitter = _FITTERS[spec.algorithm]
    except KeyError:
        raise UnknownAlgorithmName(spec.algorithm)
    return fitter(X, y, spec)
