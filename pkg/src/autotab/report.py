"""Report assembly: canonical JSON document plus SVG figures.

The JSON is the source of truth and is byte-deterministic for a fixed seed:
volatile wall-clock timings stay in the run log, so the schema's per-model
``seconds`` field is rendered as null in the report itself.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from . import plots
from .pipeline import RunResult

REPORT_VERSION = "1"


def _config_hash(config) -> str:
    canonical = json.dumps(config.to_jsonable(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _round_floats(obj, digits: int = 12):
    """Canonicalize floats so report bytes do not depend on print quirks."""
    if isinstance(obj, float):
        if np.isnan(obj) or np.isinf(obj):
            return None
        return round(obj, digits)
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    return obj


def build_plots(result: RunResult) -> list[plots.PlotArtifact]:
    """One PlotArtifact per applicable kind; inapplicable kinds are skipped."""
    artifacts: list[plots.PlotArtifact] = []
    summary = result.dataset_summary
    if summary.get("correlation_matrix"):
        artifacts.append(plots.plot("correlation_heatmap", {
            "matrix": summary["correlation_matrix"],
            "names": list(result.feature_names),
        }))
    winner_entry = next(
        (e for e in result.model_entries if e.name == result.winner), None
    )
    if winner_entry is not None and winner_entry.metrics.get("confusion_matrix"):
        artifacts.append(plots.plot("confusion_heatmap", {
            "matrix": winner_entry.metrics["confusion_matrix"],
            "labels": [str(c) for c in result.label_classes],
        }))
    if result.roc_points:
        auc = winner_entry.metrics.get("auc") if winner_entry else None
        artifacts.append(plots.plot("roc_curve", {"points": result.roc_points, "auc": auc}))
    for exp in result.explanations:
        if exp["method"] == "pdp" and exp["curves"]:
            artifacts.append(plots.plot("pdp_curve", {"curves": exp["curves"]}))
        if exp["method"] == "shap":
            artifacts.append(plots.plot("shap_bar", {
                "values": exp["mean_abs_attribution"],
                "names": exp["feature_names"],
            }))
    if result.loss_trace:
        artifacts.append(plots.plot("loss_curve", {"trace": result.loss_trace}))
    if result.pca_projection is not None and result.pca_projection.shape[1] >= 2:
        points = result.pca_projection[:, :2].tolist()
        artifacts.append(plots.plot("pca_scatter", {"points": points}))
        if result.cluster_labels_for_plot is not None:
            artifacts.append(plots.plot("cluster_scatter", {
                "points": points,
                "labels": result.cluster_labels_for_plot.tolist(),
            }))
    return artifacts


def _write_metrics_csv(result: RunResult, path: str) -> None:
    """Flat delimited view of the per-model metrics table."""
    import csv

    keys: list[str] = []
    for entry in result.model_entries:
        for k, v in (entry.metrics or {}).items():
            if isinstance(v, (int, float, type(None))) and k not in keys:
                keys.append(k)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "status"] + keys)
        for entry in result.model_entries:
            row = [entry.name, entry.status]
            for k in keys:
                v = (entry.metrics or {}).get(k)
                row.append("" if v is None else round(v, 12))
            writer.writerow(row)


def render_report(result: RunResult, out_dir: str) -> dict:
    """Write report.json and figures/*.svg under ``out_dir``; returns the report."""
    os.makedirs(out_dir, exist_ok=True)
    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    artifacts = build_plots(result)
    plot_index = []
    for art in artifacts:
        path = os.path.join("figures", f"{art.kind}.svg")
        with open(os.path.join(out_dir, path), "wb") as fh:
            fh.write(art.svg)
        plot_index.append({"kind": art.kind, "path": path, "caption": art.caption})

    models_section = []
    for entry in result.model_entries:
        models_section.append({
            "name": entry.name,
            "params": entry.spec.hyperparameters,
            "status": entry.status,
            "metrics": entry.metrics or None,
            "cv": entry.cv_scores or None,
            "error": entry.error,
            # wall time lives in the run log to keep report bytes reproducible
            "seconds": None,
        })

    report = {
        "version": REPORT_VERSION,
        "run_id": result.run_id,
        "config": result.config.to_jsonable(),
        "dataset": result.dataset_summary,
        "preprocessing": result.preprocessing_trace,
        "models": models_section,
        "winner": {
            "name": result.winner,
            "final_metrics": result.final_metrics or None,
        } if result.winner else None,
        "clustering": result.cluster_results or None,
        "explanations": result.explanations,
        "plots": plot_index,
        "warnings": result.warnings,
        "reproducibility": {
            "seed": result.config.seed,
            "config_hash": _config_hash(result.config),
            "version": REPORT_VERSION,
        },
        "log_path": "run.log.jsonl",
    }
    report = _round_floats(report)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_metrics_csv(result, os.path.join(out_dir, "model_metrics.csv"))
    if result.logger is not None:
        with open(os.path.join(out_dir, "run.log.jsonl"), "w", encoding="utf-8") as fh:
            for record in result.logger.records:
                fh.write(json.dumps(record.to_dict()) + "\n")
    return report
