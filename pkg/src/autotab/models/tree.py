"""CART decision tree: the shared building block for forests and boosting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: np.ndarray | float | None = None  # class counts or mean at a leaf

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_jsonable(self) -> dict:
        if self.is_leaf:
            v = self.value
            return {"value": v.tolist() if isinstance(v, np.ndarray) else v}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_jsonable(),
            "right": self.right.to_jsonable(),
        }


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float(np.sum(p * p))


def _best_split_classification(X, y_idx, n_classes, feature_ids):
    """Return (decrease, feature, threshold) of the best Gini split, or None."""
    n = X.shape[0]
    parent_counts = np.bincount(y_idx, minlength=n_classes).astype(np.float64)
    parent_impurity = _gini(parent_counts)
    best = None
    for f in feature_ids:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y_idx[order]
        left = np.zeros(n_classes)
        right = parent_counts.copy()
        for i in range(n - 1):
            left[ys[i]] += 1.0
            right[ys[i]] -= 1.0
            if xs[i + 1] == xs[i]:
                continue
            n_left = i + 1
            n_right = n - n_left
            decrease = parent_impurity - (
                n_left * _gini(left) + n_right * _gini(right)
            ) / n
            threshold = (xs[i] + xs[i + 1]) / 2.0
            if best is None or decrease > best[0] + 1e-15:
                best = (decrease, f, threshold)
    return best


def _best_split_regression(X, y, feature_ids):
    """Best variance-decrease split using prefix sums."""
    n = X.shape[0]
    parent_var = float(np.var(y))
    total = float(y.sum())
    total_sq = float((y * y).sum())
    best = None
    for f in feature_ids:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        csum = np.cumsum(ys)
        csum_sq = np.cumsum(ys * ys)
        for i in range(n - 1):
            if xs[i + 1] == xs[i]:
                continue
            n_left = i + 1
            n_right = n - n_left
            var_left = csum_sq[i] / n_left - (csum[i] / n_left) ** 2
            sum_right = total - csum[i]
            var_right = (total_sq - csum_sq[i]) / n_right - (sum_right / n_right) ** 2
            decrease = parent_var - (n_left * var_left + n_right * var_right) / n
            threshold = (xs[i] + xs[i + 1]) / 2.0
            if best is None or decrease > best[0] + 1e-15:
                best = (decrease, f, threshold)
    return best


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    task: str,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    n_classes: int | None = None,
) -> TreeNode:
    """Greedy CART. ``y`` holds class indices (classification) or floats.

    ``max_features`` (when set) resamples that many candidate features per
    split; tie-breaking is by (smaller feature index, smaller threshold).
    """
    X = np.asarray(X, dtype=np.float64)
    if task == "classification":
        y = np.asarray(y, dtype=np.int64)
        if n_classes is None:
            n_classes = int(y.max()) + 1
    else:
        y = np.asarray(y, dtype=np.float64)
    p = X.shape[1]

    def leaf(yy) -> TreeNode:
        if task == "classification":
            return TreeNode(value=np.bincount(yy, minlength=n_classes).astype(np.float64))
        return TreeNode(value=float(yy.mean()))

    def grow(XX, yy, depth) -> TreeNode:
        n = XX.shape[0]
        pure = (np.unique(yy).size == 1) if task == "classification" else (np.ptp(yy) == 0.0)
        if (
            pure
            or n < min_samples_split
            or (max_depth is not None and depth >= max_depth)
        ):
            return leaf(yy)
        if max_features is not None and max_features < p:
            feature_ids = np.sort(rng.choice(p, size=max_features, replace=False))
        else:
            feature_ids = range(p)
        if task == "classification":
            best = _best_split_classification(XX, yy, n_classes, feature_ids)
        else:
            best = _best_split_regression(XX, yy, feature_ids)
        # zero-decrease splits are still taken (an XOR pattern needs them);
        # only a node with no valid threshold becomes a leaf
        if best is None:
            return leaf(yy)
        _, f, threshold = best
        mask = XX[:, f] <= threshold
        node = TreeNode(feature=f, threshold=threshold)
        node.left = grow(XX[mask], yy[mask], depth + 1)
        node.right = grow(XX[~mask], yy[~mask], depth + 1)
        return node

    return grow(X, y, 0)


def tree_apply(node: TreeNode, X: np.ndarray) -> list:
    """Route every row to its leaf value."""
    out = []
    for row in X:
        cur = node
        while not cur.is_leaf:
            cur = cur.left if row[cur.feature] <= cur.threshold else cur.right
        out.append(cur.value)
    return out


def tree_leaves_for(node: TreeNode, X: np.ndarray) -> list[TreeNode]:
    out = []
    for row in X:
        cur = node
        while not cur.is_leaf:
            cur = cur.left if row[cur.feature] <= cur.threshold else cur.right
        out.append(cur)
    return out
