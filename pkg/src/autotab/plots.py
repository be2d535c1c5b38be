"""Deterministic SVG figure rendering via matplotlib.

All figures use a fixed 800x600 viewBox (figsize 800/72 x 600/72 at 72 dpi)
and a pinned hashsalt so identical inputs give byte-identical files.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import matplotlib
matplotlib.use("svg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import FuncFormatter  # noqa: E402
import numpy as np  # noqa: E402

from .errors import AutotabError  # noqa: E402

PLOT_KINDS = (
    "confusion_heatmap", "roc_curve", "pca_scatter", "cluster_scatter",
    "pdp_curve", "correlation_heatmap", "shap_bar", "loss_curve",
)

_FIGSIZE = (800 / 72, 600 / 72)


class IncompatibleSeries(AutotabError):
    pass


@dataclass(frozen=True)
class PlotArtifact:
    kind: str
    svg: bytes
    caption: str


def _fmt4(value, _pos=None) -> str:
    if value == 0:
        return "0"
    return f"{value:.4g}"


def _new_axes():
    matplotlib.rcParams["svg.hashsalt"] = "autotab"
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.xaxis.set_major_formatter(FuncFormatter(_fmt4))
    ax.yaxis.set_major_formatter(FuncFormatter(_fmt4))
    return fig, ax


def _finish(fig, kind: str, caption: str) -> PlotArtifact:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return PlotArtifact(kind=kind, svg=buf.getvalue(), caption=caption)


def _check_finite(*arrays):
    for a in arrays:
        a = np.asarray(a, dtype=np.float64)
        if a.size == 0:
            raise IncompatibleSeries("empty data series")
        if not np.all(np.isfinite(a)):
            raise IncompatibleSeries("non-finite value in data series")


def plot(kind: str, data: dict) -> PlotArtifact:
    """Render one PlotArtifact; ``data`` fields depend on the kind."""
    if kind not in PLOT_KINDS:
        raise IncompatibleSeries(f"unknown plot kind {kind!r}")
    return _RENDERERS[kind](data)


def _confusion_heatmap(data: dict) -> PlotArtifact:
    matrix = np.asarray(data["matrix"], dtype=np.float64)
    labels = data.get("labels") or [str(i) for i in range(matrix.shape[0])]
    _check_finite(matrix)
    fig, ax = _new_axes()
    ax.imshow(matrix, cmap="Blues")
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            ax.text(j, i, _fmt4(matrix[i, j]), ha="center", va="center")
    ax.set_xticks(range(len(labels)), labels)
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    ax.set_title("Confusion matrix")
    return _finish(fig, "confusion_heatmap", "Confusion matrix on the test split")


def _roc_curve(data: dict) -> PlotArtifact:
    points = np.asarray(data["points"], dtype=np.float64)
    _check_finite(points)
    fig, ax = _new_axes()
    ax.plot(points[:, 0], points[:, 1], drawstyle="steps-post")
    ax.plot([0, 1], [0, 1], linestyle="--", color="gray")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    title = "ROC curve"
    if data.get("auc") is not None:
        title += f" (AUC={data['auc']:.4g})"
    ax.set_title(title)
    return _finish(fig, "roc_curve", "ROC of the winning model")


def _scatter(data: dict, kind: str, title: str, caption: str) -> PlotArtifact:
    points = np.asarray(data["points"], dtype=np.float64)
    _check_finite(points)
    labels = data.get("labels")
    fig, ax = _new_axes()
    if labels is not None:
        labels = np.asarray(labels)
        for lab in np.unique(labels):
            mask = labels == lab
            name = "noise" if lab == -1 else f"cluster {lab}"
            ax.scatter(points[mask, 0], points[mask, 1], label=name, s=18)
        ax.legend()
    else:
        ax.scatter(points[:, 0], points[:, 1], s=18)
    ax.set_xlabel(data.get("xlabel", "component 1"))
    ax.set_ylabel(data.get("ylabel", "component 2"))
    ax.set_title(title)
    return _finish(fig, kind, caption)


def _pca_scatter(data: dict) -> PlotArtifact:
    return _scatter(data, "pca_scatter", "PCA projection", "First two principal components")


def _cluster_scatter(data: dict) -> PlotArtifact:
    return _scatter(data, "cluster_scatter", "Cluster assignments",
                    "Clusters over the first two principal components")


def _pdp_curve(data: dict) -> PlotArtifact:
    fig, ax = _new_axes()
    for curve in data["curves"]:
        _check_finite(curve["grid"], curve["curve"])
        ax.plot(curve["grid"], curve["curve"], label=curve.get("feature_name", ""))
    ax.set_xlabel("feature value")
    ax.set_ylabel("mean model output")
    ax.set_title("Partial dependence")
    ax.legend()
    return _finish(fig, "pdp_curve", "Partial dependence of the top features")


def _correlation_heatmap(data: dict) -> PlotArtifact:
    matrix = np.asarray(
        [[np.nan if v is None else v for v in row] for row in data["matrix"]],
        dtype=np.float64,
    )
    if matrix.size == 0:
        raise IncompatibleSeries("empty data series")
    names = data.get("names") or [str(i) for i in range(matrix.shape[0])]
    fig, ax = _new_axes()
    masked = np.ma.masked_invalid(matrix)
    ax.imshow(masked, cmap="coolwarm", vmin=-1.0, vmax=1.0)
    ax.set_xticks(range(len(names)), names, rotation=90, fontsize=6)
    ax.set_yticks(range(len(names)), names, fontsize=6)
    ax.set_title("Feature correlation (pearson)")
    return _finish(fig, "correlation_heatmap", "Pairwise feature correlations")


def _shap_bar(data: dict) -> PlotArtifact:
    values = np.asarray(data["values"], dtype=np.float64)
    _check_finite(values)
    names = data.get("names") or [f"f{i}" for i in range(values.size)]
    order = np.argsort(-np.abs(values), kind="stable")
    fig, ax = _new_axes()
    ax.barh(range(order.size), values[order][::-1])
    ax.set_yticks(range(order.size), [names[i] for i in order][::-1], fontsize=7)
    ax.set_xlabel("mean attribution")
    ax.set_title("Feature attributions")
    return _finish(fig, "shap_bar", "Mean Shapley attributions on explained instances")


def _loss_curve(data: dict) -> PlotArtifact:
    trace = np.asarray(data["trace"], dtype=np.float64)
    _check_finite(trace)
    fig, ax = _new_axes()
    ax.plot(np.arange(trace.size), trace)
    ax.set_xlabel("iteration")
    ax.set_ylabel("training loss")
    ax.set_title("Training loss")
    return _finish(fig, "loss_curve", "Training loss trace")


_RENDERERS = {
    "confusion_heatmap": _confusion_heatmap,
    "roc_curve": _roc_curve,
    "pca_scatter": _pca_scatter,
    "cluster_scatter": _cluster_scatter,
    "pdp_curve": _pdp_curve,
    "correlation_heatmap": _correlation_heatmap,
    "shap_bar": _shap_bar,
    "loss_curve": _loss_curve,
}
