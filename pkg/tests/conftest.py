import numpy as np
import pytest

from autotab.models.base import ModelSpec
from autotab.models.catalog import fit


def make_blobs(n_per_class, centers, sigma, seed=0):
    """Gaussian blobs with one center per class."""
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for label, center in enumerate(centers):
        xs.append(rng.normal(0, sigma, (n_per_class, len(center))) + np.asarray(center))
        ys.append(np.full(n_per_class, label))
    X = np.vstack(xs)
    y = np.concatenate(ys)
    order = rng.permutation(X.shape[0])
    return X[order], y[order]


@pytest.fixture
def blobs2():
    return make_blobs(20, [(-4.0, -4.0), (4.0, 4.0)], 1.0, seed=1)


@pytest.fixture
def blobs3():
    return make_blobs(20, [(-6.0, 0.0), (6.0, 0.0), (0.0, 8.0)], 1.0, seed=2)


def fit_simple(algorithm, X, y, task="classification", seed=0, **params):
    spec = ModelSpec(algorithm=algorithm, task=task,
                     hyperparameters=dict(params), seed=seed)
    return fit(X, y, spec)
