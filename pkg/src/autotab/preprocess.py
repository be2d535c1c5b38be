"""Feature scaling and class-imbalance oversampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import NumericMatrix
from .errors import DimensionMismatch, EmptyMatrix, MinorityTooSmall, SingleClass

SCALER_METHODS = ("unit_norm", "robust", "standard", "power", "quantile")


def quantile(values: np.ndarray, q: float) -> float:
    """Linear-interpolation (type-7) quantile."""
    return float(np.quantile(values, q, method="linear"))


def yeo_johnson(x: np.ndarray, lam: float) -> np.ndarray:
    """Yeo-Johnson power transform for a single lambda."""
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    if abs(lam) > 1e-12:
        out[pos] = ((x[pos] + 1.0) ** lam - 1.0) / lam
    else:
        out[pos] = np.log1p(x[pos])
    if abs(lam - 2.0) > 1e-12:
        out[~pos] = -(((-x[~pos] + 1.0) ** (2.0 - lam)) - 1.0) / (2.0 - lam)
    else:
        out[~pos] = -np.log1p(-x[~pos])
    return out


def _yj_log_likelihood(x: np.ndarray, lam: float) -> float:
    """Gaussian log-likelihood of the Yeo-Johnson transform, up to constants."""
    n = x.size
    z = yeo_johnson(x, lam)
    var = z.var()
    if var <= 0:
        return -np.inf
    # Jacobian term: (lam - 1) * sum(sign(x) * log(|x| + 1))
    jac = (lam - 1.0) * np.sum(np.sign(x) * np.log1p(np.abs(x)))
    return -0.5 * n * np.log(var) + jac


def _golden_section_max(f, lo: float, hi: float, tol: float = 1e-4) -> float:
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


@dataclass(frozen=True)
class ScalerParams:
    method: str
    n_features: int
    constant: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))
    mean: np.ndarray | None = None
    std: np.ndarray | None = None
    median: np.ndarray | None = None
    iqr: np.ndarray | None = None
    lam: np.ndarray | None = None               # power: per-feature lambda
    post_mean: np.ndarray | None = None         # power: standardization stats
    post_std: np.ndarray | None = None
    reference: tuple[np.ndarray, ...] | None = None  # quantile: sorted fit values


def fit_scaler(X: NumericMatrix | np.ndarray, method: str) -> ScalerParams:
    """Compute per-feature scaling statistics; constant features pass through."""
    values = X.values if isinstance(X, NumericMatrix) else np.asarray(X, dtype=np.float64)
    if values.size == 0:
        raise EmptyMatrix("cannot fit a scaler on an empty matrix")
    if method not in SCALER_METHODS:
        raise ValueError(f"unknown scaler method {method!r}")
    p = values.shape[1]
    constant = np.array([np.ptp(values[:, j]) == 0.0 for j in range(p)])
    params = dict(method=method, n_features=p, constant=constant)
    if method == "standard":
        params["mean"] = values.mean(axis=0)
        params["std"] = values.std(axis=0)  # population std
    elif method == "robust":
        params["median"] = np.array([quantile(values[:, j], 0.5) for j in range(p)])
        q1 = np.array([quantile(values[:, j], 0.25) for j in range(p)])
        q3 = np.array([quantile(values[:, j], 0.75) for j in range(p)])
        params["iqr"] = q3 - q1
        params["constant"] = constant | (params["iqr"] == 0.0)
    elif method == "power":
        lam = np.zeros(p)
        for j in range(p):
            if constant[j]:
                lam[j] = 1.0
                continue
            col = values[:, j]
            lam[j] = _golden_section_max(lambda l: _yj_log_likelihood(col, l), -5.0, 5.0)
        transformed = np.column_stack([yeo_johnson(values[:, j], lam[j]) for j in range(p)])
        params["lam"] = lam
        params["post_mean"] = transformed.mean(axis=0)
        post_std = transformed.std(axis=0)
        params["constant"] = constant | (post_std == 0.0)
        params["post_std"] = post_std
    elif method == "quantile":
        params["reference"] = tuple(np.sort(values[:, j]) for j in range(p))
    # unit_norm needs no per-feature statistics
    return ScalerParams(**params)


def transform(X: NumericMatrix | np.ndarray, params: ScalerParams) -> NumericMatrix:
    """Apply fitted scaling; returns a NumericMatrix with unchanged feature names."""
    if isinstance(X, NumericMatrix):
        values, names = X.values, X.feature_names
    else:
        values = np.asarray(X, dtype=np.float64)
        names = tuple(f"f{j}" for j in range(values.shape[1]))
    if values.shape[1] != params.n_features:
        raise DimensionMismatch(f"expected {params.n_features} features, got {values.shape[1]}")
    out = values.copy()
    keep = ~params.constant
    if params.method == "standard":
        out[:, keep] = (values[:, keep] - params.mean[keep]) / params.std[keep]
    elif params.method == "robust":
        out[:, keep] = (values[:, keep] - params.median[keep]) / params.iqr[keep]
    elif params.method == "unit_norm":
        norms = np.linalg.norm(values, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        out = values / norms
    elif params.method == "power":
        for j in range(params.n_features):
            if params.constant[j]:
                continue
            out[:, j] = (yeo_johnson(values[:, j], params.lam[j]) - params.post_mean[j]) / params.post_std[j]
    elif params.method == "quantile":
        for j in range(params.n_features):
            if params.constant[j]:
                continue
            ref = params.reference[j]
            grid = np.linspace(0.0, 1.0, ref.size)
            out[:, j] = np.interp(values[:, j], ref, grid)
    return NumericMatrix(values=out, feature_names=names)


@dataclass(frozen=True)
class SamplerSpec:
    method: str  # "random" | "smote"
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("random", "smote"):
            raise ValueError(f"unknown sampler method {self.method!r}")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")


def oversample(
    X: NumericMatrix | np.ndarray, y: np.ndarray, spec: SamplerSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Raise every class count to the majority count.

    random: resample minority rows with replacement. smote: interpolate between
    a minority row and one of its k nearest minority neighbors.
    """
    values = X.values if isinstance(X, NumericMatrix) else np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise SingleClass("oversampling requires at least two classes")
    majority = int(counts.max())
    rng = np.random.default_rng(spec.seed)
    new_rows, new_labels = [values], [y]
    for cls, count in zip(classes, counts):
        deficit = majority - int(count)
        if deficit == 0:
            continue
        members = np.flatnonzero(y == cls)
        if spec.method == "random":
            picks = rng.integers(0, members.size, size=deficit)
            new_rows.append(values[members[picks]])
        else:
            if members.size < 2:
                raise MinorityTooSmall(f"class {cls!r} has {members.size} row(s); smote needs >= 2")
            k = spec.k_neighbors
            if members.size < k + 1:
                raise MinorityTooSmall(
                    f"class {cls!r} has {members.size} rows; smote with k={k} needs >= {k + 1}"
                )
            pts = values[members]
            dists = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
            np.fill_diagonal(dists, np.inf)
            neighbor_idx = np.argsort(dists, axis=1, kind="stable")[:, :k]
            synthetic = np.empty((deficit, values.shape[1]))
            for s in range(deficit):
                a = int(rng.integers(0, members.size))
                b = int(neighbor_idx[a, int(rng.integers(0, k))])
                u = rng.random()
                synthetic[s] = pts[a] + u * (pts[b] - pts[a])
            new_rows.append(synthetic)
        new_labels.append(np.full(deficit, cls, dtype=y.dtype))
    return np.vstack(new_rows), np.concatenate(new_labels)


def auto_preprocessing(
    feature_names: tuple[str, ...], y: np.ndarray | None, task: str
) -> dict:
    """Default policy when the user leaves preprocessing untouched.

    Standard scaling for non-one-hot features, SMOTE when the class ratio
    exceeds 1.5 (k capped at minority size minus 1).
    """
    policy: dict = {"scaler": "standard", "scale_onehot": False, "oversample": None}
    if task == "classification" and y is not None:
        _, counts = np.unique(y, return_counts=True)
        if counts.size >= 2 and counts.max() / counts.min() > 1.5 and counts.min() >= 2:
            policy["oversample"] = SamplerSpec(
                method="smote", k_neighbors=min(5, int(counts.min()) - 1)
            )
    return policy
