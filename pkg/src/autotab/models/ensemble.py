"""Random forest and gradient boosting built on the CART block."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTarget
from .base import FittedModel, ModelSpec, check_xy, feature_names_of, softmax
from .tree import TreeNode, build_tree, tree_apply


class DecisionTreeModel(FittedModel):
    def __init__(self, spec, feature_names, classes, root: TreeNode):
        super().__init__(spec, feature_names, classes)
        self.root = root

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        counts = np.array(tree_apply(self.root, X))
        return counts / counts.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        if self.spec.task == "classification":
            return super().predict(X)
        X = self._check(X)
        return np.array(tree_apply(self.root, X))

    def learned_arrays(self) -> dict:
        return {"tree": self.root.to_jsonable()}


def fit_decision_tree(X, y, spec: ModelSpec) -> DecisionTreeModel:
    X, y = check_xy(X, y)
    if spec.task == "classification":
        classes = np.unique(y)
        y_idx = np.searchsorted(classes, y)
        root = build_tree(X, y_idx, "classification",
                          max_depth=spec.param("max_depth"), n_classes=classes.size)
    else:
        classes = None
        root = build_tree(X, y, "regression", max_depth=spec.param("max_depth"))
    return DecisionTreeModel(spec, feature_names_of(X, X.shape[1]), classes, root)


class RandomForestModel(FittedModel):
    def __init__(self, spec, feature_names, classes, trees: list[TreeNode]):
        super().__init__(spec, feature_names, classes)
        self.trees = trees

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        n_classes = len(self.classes)
        votes = np.zeros((X.shape[0], n_classes))
        for root in self.trees:
            counts = np.array(tree_apply(root, X))
            votes[np.arange(X.shape[0]), np.argmax(counts, axis=1)] += 1.0
        return votes / len(self.trees)

    def predict(self, X) -> np.ndarray:
        if self.spec.task == "classification":
            return super().predict(X)
        X = self._check(X)
        preds = np.array([tree_apply(root, X) for root in self.trees])
        return preds.mean(axis=0)

    def learned_arrays(self) -> dict:
        return {"trees": [t.to_jsonable() for t in self.trees]}


def fit_random_forest(X, y, spec: ModelSpec) -> RandomForestModel:
    """Bootstrap ensemble; per-tree seed derived as seed XOR tree index."""
    X, y = check_xy(X, y)
    n, p = X.shape
    n_trees = int(spec.param("n_trees", 100))
    bootstrap = bool(spec.param("bootstrap", True))
    max_depth = spec.param("max_depth")
    if spec.task == "classification":
        classes = np.unique(y)
        y_enc = np.searchsorted(classes, y)
        default_mf = int(np.ceil(np.sqrt(p)))
    else:
        classes = None
        y_enc = y.astype(np.float64)
        default_mf = int(np.ceil(p / 3))
    max_features = spec.param("max_features", default_mf)
    if max_features in (None, "all"):
        max_features = p
    max_features = min(int(max_features), p)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(spec.seed ^ (t + 1))
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(
            build_tree(
                X[rows], y_enc[rows], spec.task, max_depth=max_depth,
                max_features=max_features if max_features < p else None,
                rng=rng,
                n_classes=classes.size if classes is not None else None,
            )
        )
    return RandomForestModel(spec, feature_names_of(X, p), classes, trees)


class GradientBoostingModel(FittedModel):
    def __init__(self, spec, feature_names, classes, init, stages, learning_rate,
                 train_loss_trace):
        super().__init__(spec, feature_names, classes)
        self.init = init                 # scalar or per-class log-odds
        self.stages = stages             # list of TreeNode or list[list[TreeNode]]
        self.learning_rate = learning_rate
        self.train_loss_trace = train_loss_trace

    def _raw(self, X: np.ndarray) -> np.ndarray:
        if self.spec.task == "regression":
            out = np.full(X.shape[0], self.init)
            for root in self.stages:
                out += self.learning_rate * np.array(tree_apply(root, X))
            return out
        out = np.tile(np.asarray(self.init, dtype=np.float64), (X.shape[0], 1))
        for stage in self.stages:
            for c, root in enumerate(stage):
                out[:, c] += self.learning_rate * np.array(tree_apply(root, X))
        return out

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        raw = self._raw(X)
        if len(self.classes) == 2:
            p1 = 1.0 / (1.0 + np.exp(-np.clip(raw[:, 0], -500, 500)))
            return np.column_stack([1.0 - p1, p1])
        return softmax(raw)

    def predict(self, X) -> np.ndarray:
        if self.spec.task == "classification":
            return super().predict(X)
        X = self._check(X)
        return self._raw(X)

    def learned_arrays(self) -> dict:
        init = self.init
        return {
            "init": init.tolist() if isinstance(init, np.ndarray) else init,
            "learning_rate": self.learning_rate,
            "n_stages": len(self.stages),
        }


def _leaf_newton_values(root: TreeNode, X, residual, hessian, factor=1.0):
    """Replace regression-leaf means with Newton steps sum(r)/sum(h)."""
    from .tree import tree_leaves_for

    leaves = tree_leaves_for(root, X)
    groups: dict[int, list[int]] = {}
    for i, leaf in enumerate(leaves):
        groups.setdefault(id(leaf), []).append(i)
    seen = {}
    for i, leaf in enumerate(leaves):
        if id(leaf) in seen:
            continue
        rows = groups[id(leaf)]
        h = float(hessian[rows].sum())
        r = float(residual[rows].sum())
        leaf.value = factor * r / h if h > 1e-12 else 0.0
        seen[id(leaf)] = True


def fit_gradient_boosting(X, y, spec: ModelSpec) -> GradientBoostingModel:
    """Forward stage-wise boosting on squared loss or log-loss."""
    X, y = check_xy(X, y)
    n, p = X.shape
    n_stages = int(spec.param("n_stages", 100))
    lr = float(spec.param("learning_rate", 0.1))
    max_depth = int(spec.param("max_depth", 3))
    trace: list[float] = []
    if spec.task == "regression":
        init = float(y.mean())
        pred = np.full(n, init)
        stages = []
        trace.append(float(np.mean((y - pred) ** 2)))
        for _ in range(n_stages):
            residual = y - pred
            root = build_tree(X, residual, "regression", max_depth=max_depth)
            pred = pred + lr * np.array(tree_apply(root, X))
            stages.append(root)
            trace.append(float(np.mean((y - pred) ** 2)))
        return GradientBoostingModel(
            spec, feature_names_of(X, p), None, init, stages, lr, trace
        )

    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateTarget("boosting classification needs at least 2 classes")
    y_idx = np.searchsorted(classes, y)
    if classes.size == 2:
        t = y_idx.astype(np.float64)
        pos = t.mean()
        init = np.array([np.log(pos / (1.0 - pos))])
        raw = np.full((n, 1), init[0])
        stages = []
        for _ in range(n_stages + 1):
            prob = 1.0 / (1.0 + np.exp(-raw[:, 0]))
            trace.append(float(np.mean(
                -(t * np.log(np.clip(prob, 1e-12, 1)) + (1 - t) * np.log(np.clip(1 - prob, 1e-12, 1)))
            )))
            if len(stages) == n_stages:
                break
            residual = t - prob
            root = build_tree(X, residual, "regression", max_depth=max_depth)
            _leaf_newton_values(root, X, residual, prob * (1.0 - prob))
            raw[:, 0] += lr * np.array(tree_apply(root, X))
            stages.append([root])
        return GradientBoostingModel(
            spec, feature_names_of(X, p), classes, init, stages, lr, trace
        )

    # multiclass: one tree per class per stage against the softmax gradient
    K = classes.size
    onehot = np.zeros((n, K))
    onehot[np.arange(n), y_idx] = 1.0
    priors = onehot.mean(axis=0)
    init = np.log(np.clip(priors, 1e-12, 1))
    raw = np.tile(init, (n, 1))
    stages = []
    for _ in range(n_stages + 1):
        prob = softmax(raw)
        trace.append(float(-np.mean(np.log(np.clip(prob[np.arange(n), y_idx], 1e-12, 1)))))
        if len(stages) == n_stages:
            break
        stage = []
        residual_all = onehot - prob
        for c in range(K):
            residual = residual_all[:, c]
            root = build_tree(X, residual, "regression", max_depth=max_depth)
            _leaf_newton_values(
                root, X, residual, np.abs(residual) * (1.0 - np.abs(residual)),
                factor=(K - 1) / K,
            )
            stage.append(root)
        for c in range(K):
            raw[:, c] += lr * np.array(tree_apply(stage[c], X))
        stages.append(stage)
    return GradientBoostingModel(
        spec, feature_names_of(X, p), classes, init, stages, lr, trace
    )
