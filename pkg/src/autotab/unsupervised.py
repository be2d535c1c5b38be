"""Clustering and dimensionality reduction catalog."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ComponentCountTooLarge, KExceedsRows, NonPositiveGamma


# --- native symmetric eigendecomposition -----------------------------------

def jacobi_eigh(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) sorted by descending eigenvalue;
    eigenvectors are columns.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < tol / max(n * n, 1):
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # apply the rotation in place: rows/cols p and q only
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    eigvals = np.diag(A).copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], V[:, order]


# --- clustering ------------------------------------------------------------

@dataclass(frozen=True)
class ClusterSpec:
    algorithm: str  # kmeans | dbscan | agglomerative | gmm
    k: int = 2
    eps: float = 0.5
    min_pts: int = 5
    linkage: str = "average"
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("kmeans", "dbscan", "agglomerative", "gmm"):
            raise ValueError(f"unknown clustering algorithm {self.algorithm!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")
        if self.linkage not in ("single", "complete", "average"):
            raise ValueError(f"unknown linkage {self.linkage!r}")


@dataclass
class ClusterResult:
    algorithm: str
    labels: np.ndarray
    centroids: np.ndarray | None = None
    n_iterations: int = 0
    converged: bool = True
    inertia: float | None = None
    log_likelihood_trace: list[float] = field(default_factory=list)
    means: np.ndarray | None = None
    covariances: np.ndarray | None = None
    weights: np.ndarray | None = None
    dendrogram: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


def _as_array(X) -> np.ndarray:
    return np.asarray(getattr(X, "values", X), dtype=np.float64)


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(0, n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total == 0.0:
            centers[i] = X[rng.integers(0, n)]
        else:
            probs = d2 / total
            centers[i] = X[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, np.sum((X - centers[i]) ** 2, axis=1))
    return centers


def cluster_kmeans(X, spec: ClusterSpec) -> ClusterResult:
    """Lloyd's algorithm with k-means++ initialization."""
    X = _as_array(X)
    n = X.shape[0]
    if spec.k > n:
        raise KExceedsRows(f"k={spec.k} exceeds {n} rows")
    rng = np.random.default_rng(spec.seed)
    centers = _kmeans_pp_init(X, spec.k, rng)
    labels = np.full(n, -1)
    converged = False
    it = 0
    for it in range(1, 301):
        d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        for c in range(spec.k):
            members = new_labels == c
            if not members.any():
                # claim the point farthest from its current centroid
                far = int(np.argmax(d2[np.arange(n), new_labels]))
                new_labels[far] = c
                members = new_labels == c
            centers[c] = X[members].mean(axis=0)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
    inertia = float(np.sum((X - centers[labels]) ** 2))
    return ClusterResult(
        algorithm="kmeans", labels=labels, centroids=centers,
        n_iterations=it, converged=converged, inertia=inertia,
    )


def cluster_dbscan(X, spec: ClusterSpec) -> ClusterResult:
    """Core/border/noise DBSCAN; neighbor test is inclusive (distance <= eps)."""
    X = _as_array(X)
    n = X.shape[0]
    dists = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    neighbors = [np.flatnonzero(dists[i] <= spec.eps) for i in range(n)]
    core = np.array([len(nb) >= spec.min_pts for nb in neighbors])
    labels = np.full(n, -1, dtype=np.int64)
    cluster_id = 0
    for i in range(n):
        if not core[i] or labels[i] != -1:
            continue
        # grow the cluster from this core point
        labels[i] = cluster_id
        frontier = [i]
        while frontier:
            p = frontier.pop()
            for q in neighbors[p]:
                if labels[q] == -1:
                    labels[q] = cluster_id
                    if core[q]:
                        frontier.append(int(q))
        cluster_id += 1
    return ClusterResult(algorithm="dbscan", labels=labels)


def _linkage_distance(d_ab: float, d_a: np.ndarray, d_b: np.ndarray,
                      size_a: int, size_b: int, linkage: str) -> np.ndarray:
    if linkage == "single":
        return np.minimum(d_a, d_b)
    if linkage == "complete":
        return np.maximum(d_a, d_b)
    return (size_a * d_a + size_b * d_b) / (size_a + size_b)


def cluster_agglomerative(X, spec: ClusterSpec) -> ClusterResult:
    """Bottom-up hierarchical clustering; merge ties break by smallest indices."""
    X = _as_array(X)
    n = X.shape[0]
    if spec.k > n:
        raise KExceedsRows(f"k={spec.k} exceeds {n} rows")
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    np.fill_diagonal(D, np.inf)
    active = list(range(n))
    sizes = {i: 1 for i in range(n)}
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    dendrogram: list[tuple[int, int, float]] = []
    while len(active) > spec.k:
        best = (np.inf, -1, -1)
        for ai in range(len(active)):
            for bi in range(ai + 1, len(active)):
                a, b = active[ai], active[bi]
                d = D[a, b]
                if d < best[0]:
                    best = (d, a, b)
        d, a, b = best
        dendrogram.append((a, b, float(d)))
        # merge b into a; update linkage distances to every other cluster
        for c in active:
            if c in (a, b):
                continue
            D[a, c] = D[c, a] = _linkage_distance(
                d, D[a, c], D[b, c], sizes[a], sizes[b], spec.linkage
            )
        active.remove(b)
        members[a].extend(members[b])
        sizes[a] += sizes[b]
    labels = np.empty(n, dtype=np.int64)
    # stable cluster ids: ordered by smallest member row index
    order = sorted(active, key=lambda c: min(members[c]))
    for cid, c in enumerate(order):
        labels[members[c]] = cid
    return ClusterResult(algorithm="agglomerative", labels=labels, dendrogram=dendrogram)


def _log_gaussian(X: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    p = X.shape[1]
    sign, logdet = np.linalg.slogdet(cov)
    inv = np.linalg.inv(cov)
    diff = X - mean
    maha = np.einsum("ij,jk,ik->i", diff, inv, diff)
    return -0.5 * (p * np.log(2.0 * np.pi) + logdet + maha)


def fit_gmm(X, spec: ClusterSpec) -> ClusterResult:
    """EM for a full-covariance Gaussian mixture, initialized from k-means."""
    X = _as_array(X)
    n, p = X.shape
    k = spec.k
    if k > n:
        raise KExceedsRows(f"k={k} exceeds {n} rows")
    ridge = 1e-6 * np.eye(p)
    km = cluster_kmeans(X, ClusterSpec(algorithm="kmeans", k=k, seed=spec.seed))
    means = km.centroids.copy()
    covs = np.empty((k, p, p))
    weights = np.empty(k)
    for c in range(k):
        mem = X[km.labels == c]
        weights[c] = max(mem.shape[0], 1) / n
        if mem.shape[0] >= 2:
            covs[c] = np.cov(mem.T, bias=True).reshape(p, p) + ridge
        else:
            covs[c] = np.cov(X.T, bias=True).reshape(p, p) + ridge
    weights /= weights.sum()
    trace: list[float] = []
    converged = False
    it = 0
    resp = np.full((n, k), 1.0 / k)
    for it in range(1, 201):
        # E step
        log_prob = np.column_stack(
            [np.log(weights[c]) + _log_gaussian(X, means[c], covs[c]) for c in range(k)]
        )
        m = log_prob.max(axis=1, keepdims=True)
        log_norm = m + np.log(np.exp(log_prob - m).sum(axis=1, keepdims=True))
        ll = float(log_norm.sum())
        resp = np.exp(log_prob - log_norm)
        if trace and abs(ll - trace[-1]) < 1e-4 * abs(trace[-1]):
            trace.append(ll)
            converged = True
            break
        trace.append(ll)
        # M step
        nk = resp.sum(axis=0)
        weights = nk / n
        for c in range(k):
            means[c] = (resp[:, c] @ X) / nk[c]
            diff = X - means[c]
            covs[c] = (resp[:, c, None] * diff).T @ diff / nk[c] + ridge
    labels = np.argmax(resp, axis=1)
    return ClusterResult(
        algorithm="gmm", labels=labels, n_iterations=it, converged=converged,
        log_likelihood_trace=trace, means=means, covariances=covs, weights=weights,
    )


def cluster(X, spec: ClusterSpec) -> ClusterResult:
    dispatch = {
        "kmeans": cluster_kmeans,
        "dbscan": cluster_dbscan,
        "agglomerative": cluster_agglomerative,
        "gmm": fit_gmm,
    }
    return dispatch[spec.algorithm](X, spec)


def silhouette_score(X, labels: np.ndarray) -> float:
    """Mean silhouette over points in non-noise clusters; 0 for a single cluster."""
    X = _as_array(X)
    labels = np.asarray(labels)
    mask = labels >= 0
    X, labels = X[mask], labels[mask]
    uniq = np.unique(labels)
    if uniq.size < 2:
        return 0.0
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    scores = []
    for i in range(X.shape[0]):
        own = labels == labels[i]
        own[i] = False
        if not own.any():
            scores.append(0.0)
            continue
        a = D[i, own].mean()
        b = min(D[i, labels == c].mean() for c in uniq if c != labels[i])
        scores.append((b - a) / max(a, b))
    return float(np.mean(scores))


# --- dimensionality reduction ----------------------------------------------

@dataclass(frozen=True)
class ProjectionModel:
    method: str  # pca | kernel_pca
    components: np.ndarray          # pca: (p, c); kernel: alphas (n, c)
    explained_variance: np.ndarray
    mean: np.ndarray | None = None          # pca: feature means
    kernel: str = "linear"
    gamma: float | None = None
    training_data: np.ndarray | None = None  # kernel: stored rows
    kernel_row_means: np.ndarray | None = None
    kernel_mean: float | None = None


def fit_pca(X, n_components: int) -> ProjectionModel:
    """PCA via native Jacobi eigendecomposition of the covariance matrix."""
    X = _as_array(X)
    n, p = X.shape
    if n_components > min(n, p):
        raise ComponentCountTooLarge(f"{n_components} > min({n}, {p})")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / max(n - 1, 1)
    eigvals, eigvecs = jacobi_eigh(cov)
    comps = eigvecs[:, :n_components]
    # sign convention: the largest-magnitude entry of each component is positive
    for c in range(comps.shape[1]):
        j = int(np.argmax(np.abs(comps[:, c])))
        if comps[j, c] < 0:
            comps[:, c] = -comps[:, c]
    return ProjectionModel(
        method="pca", components=comps,
        explained_variance=np.maximum(eigvals[:n_components], 0.0), mean=mean,
    )


def _kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    d2 = np.sum(A**2, axis=1)[:, None] + np.sum(B**2, axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


def fit_kernel_pca(X, n_components: int, kernel: str = "rbf",
                   gamma: float | None = None) -> ProjectionModel:
    """Kernel PCA with double-centered kernel matrix; rbf or linear kernel."""
    X = _as_array(X)
    n, p = X.shape
    if n_components > n:
        raise ComponentCountTooLarge(f"{n_components} > {n} rows")
    if kernel not in ("linear", "rbf"):
        raise ValueError(f"unknown kernel {kernel!r}")
    if gamma is None:
        gamma = 1.0 / p
    if kernel == "rbf" and gamma <= 0:
        raise NonPositiveGamma(str(gamma))
    K = _kernel_matrix(X, X, kernel, gamma)
    row_means = K.mean(axis=1)
    total_mean = float(K.mean())
    Kc = K - row_means[:, None] - row_means[None, :] + total_mean
    eigvals, eigvecs = jacobi_eigh(Kc)
    eigvals = np.maximum(eigvals[:n_components], 0.0)
    vecs = eigvecs[:, :n_components]
    # alphas scaled so that projection = centered kernel row @ alphas
    alphas = np.zeros_like(vecs)
    nonzero = eigvals > 1e-12
    alphas[:, nonzero] = vecs[:, nonzero] / np.sqrt(eigvals[nonzero])
    return ProjectionModel(
        method="kernel_pca", components=alphas,
        explained_variance=eigvals / max(n - 1, 1),
        kernel=kernel, gamma=gamma, training_data=X,
        kernel_row_means=row_means, kernel_mean=total_mean,
    )


def project(model: ProjectionModel, X) -> np.ndarray:
    X = _as_array(X)
    if model.method == "pca":
        return (X - model.mean) @ model.components
    K = _kernel_matrix(X, model.training_data, model.kernel, model.gamma)
    Kc = (
        K
        - K.mean(axis=1, keepdims=True)
        - model.kernel_row_means[None, :]
        + model.kernel_mean
    )
    return Kc @ model.components
