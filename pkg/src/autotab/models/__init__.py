from .base import FittedModel, ModelSpec
from .catalog import default_grid, fit, get_models, load_catalog
from .ensemble import fit_decision_tree, fit_gradient_boosting, fit_random_forest
from .knn import fit_knn
from .linear import fit_linear_regression, fit_logistic_regression
from .mlp import fit_mlp
from .naive_bayes import fit_naive_bayes
from .svm import fit_svm

__all__ = [
    "FittedModel",
    "ModelSpec",
    "default_grid",
    "fit",
    "get_models",
    "load_catalog",
    "fit_decision_tree",
    "fit_gradient_boosting",
    "fit_random_forest",
    "fit_knn",
    "fit_linear_regression",
    "fit_logistic_regression",
    "fit_mlp",
    "fit_naive_bayes",
    "fit_svm",
]
