"""Correlation statistics and per-feature distribution summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantInput, LengthMismatch

METHODS = ("pearson", "spearman", "kendall")


@dataclass(frozen=True)
class CorrelationResult:
    method: str
    value: float
    n: int


def _check(x: np.ndarray, y: np.ndarray):
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} vs {y.size}")
    if x.size < 2:
        raise LengthMismatch("need at least 2 samples")


def average_ranks(x: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; ties get the mean of the ranks they span."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt((xc * xc).sum())
    sy = np.sqrt((yc * yc).sum())
    if sx == 0.0 or sy == 0.0:
        raise ConstantInput("pearson undefined for a constant input")
    return float((xc * yc).sum() / (sx * sy))


def _kendall_tau_b(x: np.ndarray, y: np.ndarray) -> float:
    n = x.size
    concordant = discordant = tx = ty = 0
    for i in range(n - 1):
        dx = x[i + 1 :] - x[i]
        dy = y[i + 1 :] - y[i]
        sign = np.sign(dx) * np.sign(dy)
        concordant += int(np.sum(sign > 0))
        discordant += int(np.sum(sign < 0))
        tx += int(np.sum((dx == 0) & (dy != 0)))
        ty += int(np.sum((dy == 0) & (dx != 0)))
    denom = np.sqrt(
        (concordant + discordant + tx) * (concordant + discordant + ty)
    )
    if denom == 0.0:
        raise ConstantInput("kendall tau-b undefined: no comparable pairs")
    return float((concordant - discordant) / denom)


def correlation(x, y, method: str = "pearson") -> CorrelationResult:
    """Pairwise correlation; pearson, spearman (rank pearson), or kendall tau-b."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check(x, y)
    if method == "pearson":
        value = _pearson(x, y)
    elif method == "spearman":
        value = _pearson(average_ranks(x), average_ranks(y))
    elif method == "kendall":
        value = _kendall_tau_b(x, y)
    else:
        raise ValueError(f"unknown correlation method {method!r}")
    # clamp tiny float drift outside [-1, 1]
    value = min(1.0, max(-1.0, value))
    return CorrelationResult(method=method, value=value, n=x.size)


def correlation_matrix(X, method: str = "pearson") -> np.ndarray:
    """Symmetric pairwise correlation matrix; constant columns yield NaN markers."""
    values = getattr(X, "values", None)
    values = np.asarray(values if values is not None else X, dtype=np.float64)
    p = values.shape[1]
    out = np.full((p, p), np.nan)
    for i in range(p):
        for j in range(i, p):
            try:
                r = correlation(values[:, i], values[:, j], method).value
            except ConstantInput:
                r = np.nan
            out[i, j] = out[j, i] = r
    return out


def distribution_summary(X) -> list[dict]:
    """Per-feature skewness and excess kurtosis (descriptive only)."""
    values = getattr(X, "values", X)
    values = np.asarray(values, dtype=np.float64)
    out = []
    for j in range(values.shape[1]):
        col = values[:, j]
        mu = col.mean()
        sd = col.std()
        if sd == 0.0:
            out.append({"skewness": None, "excess_kurtosis": None})
            continue
        z = (col - mu) / sd
        out.append(
            {
                "skewness": float(np.mean(z**3)),
                "excess_kurtosis": float(np.mean(z**4) - 3.0),
            }
        )
    return out
