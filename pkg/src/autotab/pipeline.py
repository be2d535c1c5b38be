"""Training orchestration: split, evaluate, tune, and the end-to-end run."""

from __future__ import annotations

import concurrent.futures
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import models as model_engine
from . import preprocess, stats, unsupervised
from .dataset import NumericMatrix, RawTable, encode, infer_schema, sanitize
from .errors import (
    ConfigError,
    DimensionMismatch,
    InsufficientRowsForFolds,
    StageError,
    TooFewRows,
)
from .explain import counterfactual, lime_explain, pdp, shap_values
from .models import ModelSpec
from .runlog import RunLogger


# --- splitting --------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.25
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")


def train_test_split(X, y, spec: SplitSpec):
    """Seeded shuffle split; stratified keeps class proportions within one row.

    Returns (X_train, y_train, X_test, y_test, warnings).
    """
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    y = np.asarray(y)
    n = X.shape[0]
    if n < 4:
        raise TooFewRows(f"{n} rows; need at least 4")
    rng = np.random.default_rng(spec.seed)
    warnings: list[str] = []
    test_idx: list[int] = []
    if spec.stratified:
        for cls in np.unique(y):
            members = np.flatnonzero(y == cls)
            if members.size == 1:
                warnings.append(f"class {cls!r} has a single row; kept in train")
                continue
            members = members[rng.permutation(members.size)]
            n_test = int(round(members.size * spec.test_fraction))
            n_test = min(max(n_test, 0), members.size - 1)
            test_idx.extend(members[:n_test].tolist())
    else:
        order = rng.permutation(n)
        n_test = int(round(n * spec.test_fraction))
        test_idx = order[:n_test].tolist()
    if not test_idx:  # force a non-empty test set
        order = rng.permutation(n)
        test_idx = [int(order[0])]
    test_mask = np.zeros(n, dtype=bool)
    test_mask[test_idx] = True
    return X[~test_mask], y[~test_mask], X[test_mask], y[test_mask], warnings


# --- metrics ----------------------------------------------------------------

def auc_rank(y_true: np.ndarray, scores: np.ndarray) -> float:
    """Binary AUC via the Mann-Whitney rank statistic; ties contribute 1/2."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    pos = scores[y_true == 1]
    neg = scores[y_true == 0]
    if pos.size == 0 or neg.size == 0:
        raise ValueError("AUC undefined: one class absent")
    ranks = stats.average_ranks(scores)
    rank_sum_pos = float(ranks[y_true == 1].sum())
    u = rank_sum_pos - pos.size * (pos.size + 1) / 2.0
    return u / (pos.size * neg.size)


def classification_metrics(y_true, y_pred, proba: np.ndarray | None = None,
                           classes: np.ndarray | None = None) -> dict:
    """Accuracy, macro precision/recall/F1, binary AUC, confusion matrix."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise DimensionMismatch("prediction/label length mismatch")
    if classes is None:
        classes = np.unique(np.concatenate([y_true, y_pred]))
    k = classes.size
    pos = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((k, k), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        confusion[pos[t], pos[p]] += 1
    accuracy = float(np.trace(confusion) / y_true.size)
    precisions, recalls, f1s = [], [], []
    for i in range(k):
        tp = confusion[i, i]
        fp = confusion[:, i].sum() - tp
        fn = confusion[i, :].sum() - tp
        prec = tp / (tp + fp) if tp + fp > 0 else 0.0
        rec = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)
    auc = None
    if k == 2 and proba is not None and np.unique(y_true).size == 2:
        binary = (y_true == classes[1]).astype(int)
        auc = auc_rank(binary, proba[:, 1])
    return {
        "accuracy": accuracy,
        "precision_macro": float(np.mean(precisions)),
        "recall_macro": float(np.mean(recalls)),
        "f1_macro": float(np.mean(f1s)),
        "auc": auc,
        "confusion_matrix": confusion.tolist(),
        "classes": [c.item() if hasattr(c, "item") else c for c in classes],
    }


def regression_metrics(y_true, y_pred) -> dict:
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape:
        raise DimensionMismatch("prediction/label length mismatch")
    err = y_true - y_pred
    mse = float(np.mean(err**2))
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    r2 = 1.0 - float(np.sum(err**2)) / ss_tot if ss_tot > 0 else 0.0
    return {
        "mse": mse,
        "rmse": float(np.sqrt(mse)),
        "mae": float(np.mean(np.abs(err))),
        "r2": r2,
    }


def evaluate(model, X_test, y_test, task: str) -> dict:
    X_test = np.asarray(getattr(X_test, "values", X_test), dtype=np.float64)
    y_pred = model.predict(X_test)
    if task == "classification":
        proba = model.predict_proba(X_test)
        return classification_metrics(y_test, y_pred, proba, model.classes)
    return regression_metrics(y_test, y_pred)


def primary_metric(metrics: dict, task: str) -> float:
    return metrics["accuracy"] if task == "classification" else metrics["r2"]


# --- cross-validation -------------------------------------------------------

@dataclass
class TuneResult:
    best_spec: ModelSpec
    candidate_scores: list[tuple[dict, list[float]]]
    folds: int


def _fold_assignment(y: np.ndarray, folds: int, seed: int, stratified: bool) -> np.ndarray:
    n = y.shape[0]
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    if stratified:
        for cls in np.unique(y):
            members = np.flatnonzero(y == cls)
            members = members[rng.permutation(members.size)]
            assignment[members] = np.arange(members.size) % folds
    else:
        assignment[:] = rng.permutation(n) % folds
    return assignment


def grid_search(
    spec_template: ModelSpec,
    grid: dict,
    X_train,
    y_train,
    folds: int = 5,
    seed: int = 0,
    fold_preprocess=None,
) -> TuneResult:
    """K-fold CV over the Cartesian product of the grid.

    Score is the mean validation primary metric; ties keep the first candidate
    in grid order. ``fold_preprocess(X_tr, y_tr, X_val)`` (when given) is
    applied inside each fold to keep scaling/oversampling leakage-free.
    """
    X = np.asarray(getattr(X_train, "values", X_train), dtype=np.float64)
    y = np.asarray(y_train)
    task = spec_template.task
    stratified = task == "classification"
    if folds < 2:
        raise InsufficientRowsForFolds("folds must be >= 2")
    if stratified:
        _, counts = np.unique(y, return_counts=True)
        if counts.min() < folds:
            raise InsufficientRowsForFolds(
                f"smallest class has {counts.min()} rows; need >= {folds}"
            )
    elif X.shape[0] < folds:
        raise InsufficientRowsForFolds(f"{X.shape[0]} rows for {folds} folds")
    assignment = _fold_assignment(y, folds, seed, stratified)
    names = sorted(grid.keys())
    combos = [dict(zip(names, values)) for values in product(*(grid[n] for n in names))] or [{}]
    candidate_scores: list[tuple[dict, list[float]]] = []
    best = None
    for combo in combos:
        spec = spec_template.with_params(**combo)
        scores = []
        for fold in range(folds):
            val = assignment == fold
            X_tr, y_tr, X_val = X[~val], y[~val], X[val]
            if fold_preprocess is not None:
                X_tr, y_tr, X_val = fold_preprocess(X_tr, y_tr, X_val)
            model = model_engine.fit(X_tr, y_tr, spec)
            scores.append(primary_metric(evaluate(model, X_val, y[val], task), task))
        mean_score = float(np.mean(scores))
        candidate_scores.append((combo, scores))
        if best is None or mean_score > best[0] + 1e-12:
            best = (mean_score, spec)
    return TuneResult(best_spec=best[1], candidate_scores=candidate_scores, folds=folds)


# --- run configuration ------------------------------------------------------

@dataclass
class RunConfig:
    task: str
    dataset_id: str
    target: str | None = None
    inputs: list[str] | None = None
    models: list[str] | None = None
    scaler: str | None = None          # None = automatic policy
    oversample_method: str | None = None
    test_fraction: float = 0.25
    seed: int = 0
    tuning_enabled: bool = True
    tuning_folds: int = 5
    notify_mode: str | None = None     # file | webhook
    notify_address: str | None = None
    categorical_threshold: int = 20
    model_timeout_seconds: float = 120.0

    def to_jsonable(self) -> dict:
        return {
            "task": self.task,
            "dataset_id": self.dataset_id,
            "target": self.target,
            "inputs": self.inputs,
            "models": self.models,
            "preprocessing": {"scaler": self.scaler, "oversample": self.oversample_method},
            "split": {"test_fraction": self.test_fraction, "seed": self.seed},
            "tuning": {"enabled": self.tuning_enabled, "folds": self.tuning_folds},
            "notify": {"mode": self.notify_mode, "address": self.notify_address},
        }


def parse_config(doc: dict) -> RunConfig:
    """Validate a RunConfig JSON document; raises ConfigError naming the field."""
    if not isinstance(doc, dict):
        raise ConfigError("config", "must be a JSON object")
    task = doc.get("task")
    if task not in ("classification", "regression", "unsupervised"):
        raise ConfigError("task", "must be classification, regression, or unsupervised")
    dataset_id = doc.get("dataset_id")
    if not isinstance(dataset_id, str) or not dataset_id:
        raise ConfigError("dataset_id", "required")
    target = doc.get("target")
    if task in ("classification", "regression") and not target:
        raise ConfigError("target", "required for supervised tasks")
    inputs = doc.get("inputs")
    if inputs is not None and (
        not isinstance(inputs, list) or not all(isinstance(c, str) for c in inputs)
    ):
        raise ConfigError("inputs", "must be a list of column names")
    models = doc.get("models")
    if models is not None and not isinstance(models, list):
        raise ConfigError("models", "must be a list of algorithm names")
    pre = doc.get("preprocessing") or {}
    scaler = pre.get("scaler")
    if scaler is not None and scaler not in preprocess.SCALER_METHODS:
        raise ConfigError("preprocessing.scaler", f"unknown method {scaler!r}")
    oversample_method = pre.get("oversample")
    if oversample_method is not None and oversample_method not in ("random", "smote", "none"):
        raise ConfigError("preprocessing.oversample", f"unknown method {oversample_method!r}")
    split = doc.get("split") or {}
    test_fraction = split.get("test_fraction", 0.25)
    if not isinstance(test_fraction, (int, float)) or not 0.0 < test_fraction < 1.0:
        raise ConfigError("split.test_fraction", "must be in (0, 1)")
    seed = split.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("split.seed", "must be an integer")
    tuning = doc.get("tuning") or {}
    folds = tuning.get("folds", 5)
    if not isinstance(folds, int) or folds < 2:
        raise ConfigError("tuning.folds", "must be an integer >= 2")
    notify = doc.get("notify") or {}
    notify_mode = notify.get("mode")
    if notify_mode is not None and notify_mode not in ("file", "webhook"):
        raise ConfigError("notify.mode", "must be file or webhook")
    if notify_mode == "webhook" and not notify.get("address"):
        raise ConfigError("notify.address", "required for webhook notifications")
    return RunConfig(
        task=task,
        dataset_id=dataset_id,
        target=target,
        inputs=inputs,
        models=models,
        scaler=scaler,
        oversample_method=oversample_method,
        test_fraction=float(test_fraction),
        seed=seed,
        tuning_enabled=bool(tuning.get("enabled", True)),
        tuning_folds=folds,
        notify_mode=notify_mode,
        notify_address=notify.get("address"),
    )


# --- run result -------------------------------------------------------------

@dataclass
class ModelEntry:
    name: str
    spec: ModelSpec
    status: str = "ok"  # ok | timed_out | failed
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0
    cv_scores: list = field(default_factory=list)
    error: str | None = None


@dataclass
class RunResult:
    task: str
    config: RunConfig
    run_id: str
    dataset_summary: dict = field(default_factory=dict)
    preprocessing_trace: list = field(default_factory=list)
    model_entries: list[ModelEntry] = field(default_factory=list)
    winner: str | None = None
    final_model: object | None = None
    final_metrics: dict = field(default_factory=dict)
    explanations: list = field(default_factory=list)
    cluster_results: dict = field(default_factory=dict)
    pca_projection: np.ndarray | None = None
    pca_explained_variance: np.ndarray | None = None
    cluster_labels_for_plot: np.ndarray | None = None
    feature_names: tuple[str, ...] = ()
    label_classes: tuple = ()
    logger: RunLogger | None = None
    roc_points: list | None = None
    loss_trace: list | None = None
    warnings: list = field(default_factory=list)


def _derived_seed(seed: int, index: int) -> int:
    return (seed ^ (0x9E3779B9 * (index + 1))) & 0x7FFFFFFF


def _make_fold_preprocess(config: RunConfig, onehot_mask: np.ndarray, task: str,
                          sampler_seed: int):
    scale_mask = ~onehot_mask
    method = config.scaler or "standard"

    def fold_preprocess(X_tr, y_tr, X_val):
        X_tr, X_val = X_tr.copy(), X_val.copy()
        if scale_mask.any():
            params = preprocess.fit_scaler(X_tr[:, scale_mask], method)
            X_tr[:, scale_mask] = preprocess.transform(X_tr[:, scale_mask], params).values
            X_val[:, scale_mask] = preprocess.transform(X_val[:, scale_mask], params).values
        sampler = _choose_sampler(config, y_tr, task, sampler_seed)
        if sampler is not None:
            X_tr, y_tr = preprocess.oversample(X_tr, y_tr, sampler)
        return X_tr, y_tr, X_val

    return fold_preprocess


def _choose_sampler(config: RunConfig, y, task: str, seed: int):
    if task != "classification":
        return None
    if config.oversample_method == "none":
        return None
    _, counts = np.unique(y, return_counts=True)
    if counts.size < 2:
        return None
    if config.oversample_method == "random":
        return preprocess.SamplerSpec(method="random", seed=seed)
    if config.oversample_method == "smote":
        if counts.min() < 2:
            return None
        return preprocess.SamplerSpec(
            method="smote", k_neighbors=min(5, int(counts.min()) - 1), seed=seed
        )
    # automatic policy: SMOTE only under real imbalance
    if counts.max() / counts.min() > 1.5 and counts.min() >= 2:
        return preprocess.SamplerSpec(
            method="smote", k_neighbors=min(5, int(counts.min()) - 1), seed=seed
        )
    return None


def _stage(logger: RunLogger, name: str):
    class _StageContext:
        def __enter__(self):
            logger.log(name, "started")
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None:
                logger.log(name, f"failed: {exc}", level="error")
                if not isinstance(exc, StageError):
                    raise StageError(name, exc) from exc
                return False
            logger.log(name, "finished")
            return False

    return _StageContext()


def run_pipeline(config: RunConfig, table: RawTable,
                 log_path: str | None = None, run_id: str = "local") -> RunResult:
    """Execute the full pipeline on a parsed table and return a RunResult."""
    logger = RunLogger(run_id, path=log_path)
    result = RunResult(task=config.task, config=config, run_id=run_id, logger=logger)

    with _stage(logger, "prepreprocess"):
        schema = infer_schema(table, config.categorical_threshold)
        clean = sanitize(table, schema)
        if config.inputs:
            keep = list(config.inputs)
            if config.target and config.target not in keep:
                keep.append(config.target)
            missing = [c for c in keep if c not in [n.strip() for n in clean.column_names]]
            if missing:
                raise ConfigError("inputs", f"unknown column(s): {', '.join(missing)}")
            idx = [i for i, n in enumerate(clean.column_names) if n.strip() in keep]
            clean = RawTable(
                column_names=tuple(clean.column_names[i] for i in idx),
                rows=tuple(tuple(row[i] for i in idx) for row in clean.rows),
                source_path=clean.source_path,
            )
            schema = infer_schema(clean, config.categorical_threshold)
        logger.log("prepreprocess", f"{clean.n_rows} rows after sanitize")

    with _stage(logger, "encode"):
        X, label_map = encode(clean, schema, config.target, config.task)
        result.feature_names = X.feature_names
        if label_map is not None:
            result.label_classes = tuple(label_map.classes)
        corr = stats.correlation_matrix(X, "pearson")
        result.dataset_summary = {
            "n_rows": clean.n_rows,
            "n_features": X.n_features,
            "schema": schema.to_dict(),
            "correlation_matrix": [
                [None if np.isnan(v) else round(float(v), 10) for v in row]
                for row in corr
            ],
            "distributions": stats.distribution_summary(X),
        }

    onehot_mask = np.array(["=" in name for name in X.feature_names])
    if config.task == "unsupervised":
        _run_unsupervised(config, X, result, logger)
        return result

    y = label_map.encoded
    with _stage(logger, "preprocess"):
        split = SplitSpec(test_fraction=config.test_fraction,
                          stratified=config.task == "classification", seed=config.seed)
        X_tr_raw, y_tr_raw, X_te_raw, y_te, warns = train_test_split(X.values, y, split)
        result.warnings.extend(warns)
        scale_mask = ~onehot_mask
        method = config.scaler or "standard"
        X_tr, X_te = X_tr_raw.copy(), X_te_raw.copy()
        scaler_params = None
        if scale_mask.any():
            scaler_params = preprocess.fit_scaler(X_tr[:, scale_mask], method)
            X_tr[:, scale_mask] = preprocess.transform(X_tr[:, scale_mask], scaler_params).values
            X_te[:, scale_mask] = preprocess.transform(X_te[:, scale_mask], scaler_params).values
        sampler = _choose_sampler(config, y_tr_raw, config.task, _derived_seed(config.seed, 1000))
        if sampler is not None:
            X_tr_bal, y_tr_bal = preprocess.oversample(X_tr, y_tr_raw, sampler)
        else:
            X_tr_bal, y_tr_bal = X_tr, y_tr_raw
        result.preprocessing_trace = [
            {"step": "scaler", "method": method if scale_mask.any() else None,
             "scaled_features": int(scale_mask.sum())},
            {"step": "oversample",
             "method": sampler.method if sampler else None,
             "train_rows_before": int(y_tr_raw.size),
             "train_rows_after": int(y_tr_bal.size)},
        ]
        logger.log("preprocess",
                   f"scaler={method}, oversample={sampler.method if sampler else 'none'}")

    with _stage(logger, "get_models"):
        specs = model_engine.get_models(
            config.task, X_tr_bal.shape[0], X.n_features,
            user_selection=config.models, seed=config.seed,
        )
        logger.log("get_models", f"{len(specs)} model spec(s)")

    fold_pre = _make_fold_preprocess(config, onehot_mask, config.task,
                                     _derived_seed(config.seed, 2000))
    with _stage(logger, "train"):
        for idx, spec in enumerate(specs):
            spec = ModelSpec(spec.algorithm, spec.task, dict(spec.hyperparameters),
                             seed=_derived_seed(config.seed, idx))
            entry = ModelEntry(name=spec.algorithm, spec=spec)
            start = time.perf_counter()
            pool = concurrent.futures.ThreadPoolExecutor(max_workers=1)
            try:
                future = pool.submit(
                    _tune_fit_evaluate, config, spec, X_tr_raw, y_tr_raw,
                    X_tr_bal, y_tr_bal, X_te, y_te, fold_pre,
                )
                tuned_spec, model, metrics, cv_scores = future.result(
                    timeout=config.model_timeout_seconds
                )
                entry.spec = tuned_spec
                entry.metrics = metrics
                entry.cv_scores = cv_scores
                entry._model = model
                if spec.algorithm == "gradient_boosting" and hasattr(model, "train_loss_trace"):
                    result.loss_trace = list(model.train_loss_trace)
                if spec.algorithm == "mlp" and result.loss_trace is None and hasattr(model, "loss_trace"):
                    result.loss_trace = list(model.loss_trace)
                logger.log("train", f"{spec.algorithm}: "
                                    f"{primary_metric(metrics, config.task):.4f}")
            except concurrent.futures.TimeoutError:
                entry.status = "timed_out"
                logger.log("train", f"{spec.algorithm}: timed out", level="warn")
            except Exception as exc:  # noqa: BLE001 - per-model isolation
                entry.status = "failed"
                entry.error = str(exc)
                logger.log("train", f"{spec.algorithm}: failed: {exc}", level="error")
            finally:
                # a timed-out worker keeps running; do not wait for it
                pool.shutdown(wait=False, cancel_futures=True)
            entry.seconds = time.perf_counter() - start
            result.model_entries.append(entry)

        scored = [e for e in result.model_entries if e.status == "ok"]
        if not scored:
            raise RuntimeError("no model finished successfully")
        winner_entry = max(scored, key=lambda e: primary_metric(e.metrics, config.task))
        result.winner = winner_entry.name
        logger.log("train", f"winner: {result.winner}")

        # retrain the winner on 100% of the sanitized rows
        X_full = X.values.copy()
        if scale_mask.any():
            full_params = preprocess.fit_scaler(X_full[:, scale_mask], method)
            X_full[:, scale_mask] = preprocess.transform(
                X_full[:, scale_mask], full_params
            ).values
        sampler_full = _choose_sampler(config, y, config.task, _derived_seed(config.seed, 3000))
        if sampler_full is not None:
            X_fit, y_fit = preprocess.oversample(X_full, y, sampler_full)
        else:
            X_fit, y_fit = X_full, y
        final_model = model_engine.fit(
            NumericMatrix(X_fit, X.feature_names), y_fit, winner_entry.spec
        )
        result.final_model = final_model
        result.final_metrics = winner_entry.metrics

    with _stage(logger, "explain"):
        _run_explanations(config, result, final_model, X_te, y_te, X_tr_bal)

    with _stage(logger, "visualize"):
        if config.task == "classification" and len(result.label_classes) == 2:
            model = winner_entry._model
            proba = model.predict_proba(X_te)[:, 1]
            binary = (y_te == model.classes[1]).astype(int)
            result.roc_points = _roc_points(binary, proba)
        logger.log("visualize", "figure data assembled")

    return result


def _tune_fit_evaluate(config, spec, X_tr_raw, y_tr_raw, X_tr_bal, y_tr_bal,
                       X_te, y_te, fold_pre):
    cv_scores: list = []
    if config.tuning_enabled:
        grid = model_engine.default_grid(spec.algorithm)
        if grid:
            _, counts = (np.unique(y_tr_raw, return_counts=True)
                         if config.task == "classification" else (None, np.array([len(y_tr_raw)])))
            folds = min(config.tuning_folds, int(counts.min()))
            if folds >= 2:
                tune = grid_search(spec, grid, X_tr_raw, y_tr_raw,
                                   folds=folds, seed=spec.seed, fold_preprocess=fold_pre)
                spec = tune.best_spec
                cv_scores = [
                    {"params": combo, "scores": scores}
                    for combo, scores in tune.candidate_scores
                ]
    model = model_engine.fit(X_tr_bal, y_tr_bal, spec)
    metrics = evaluate(model, X_te, y_te, config.task)
    return spec, model, metrics, cv_scores


def _roc_points(y_binary: np.ndarray, scores: np.ndarray) -> list:
    order = np.argsort(-scores, kind="stable")
    y_sorted = y_binary[order]
    pos = max(int(y_binary.sum()), 1)
    neg = max(int((1 - y_binary).sum()), 1)
    tpr = np.concatenate([[0.0], np.cumsum(y_sorted) / pos])
    fpr = np.concatenate([[0.0], np.cumsum(1 - y_sorted) / neg])
    return [[float(f), float(t)] for f, t in zip(fpr, tpr)]


def _run_explanations(config, result: RunResult, model, X_te, y_te, X_background):
    logger = result.logger
    rng = np.random.default_rng(_derived_seed(config.seed, 9000))
    background = X_background[: min(25, X_background.shape[0])]
    n_explain = min(5, X_te.shape[0])
    p = X_te.shape[1]
    mode = "exact" if p <= 12 else "sampled"
    shap_exps = []
    for i in range(n_explain):
        exp = shap_values(model, X_te[i], background, mode=mode,
                          seed=_derived_seed(config.seed, 9100 + i))
        shap_exps.append(exp)
    mean_abs = np.mean([np.abs(e.attributions) for e in shap_exps], axis=0)
    result.explanations.append({
        "method": "shap",
        "mode": mode,
        "instances": [e.instance.tolist() for e in shap_exps],
        "attributions": [e.attributions.tolist() for e in shap_exps],
        "baselines": [e.baseline for e in shap_exps],
        "feature_names": list(result.feature_names),
        "mean_abs_attribution": mean_abs.tolist(),
    })
    logger.log("explain", f"shap ({mode}) on {n_explain} instance(s)")

    top = np.argsort(-mean_abs, kind="stable")[: min(4, p)]
    pdp_payload = []
    for f in top:
        exp = pdp(model, X_background, int(f), grid_points=20)
        pdp_payload.append({
            "feature": int(f),
            "feature_name": result.feature_names[int(f)],
            "grid": exp.grid.tolist(),
            "curve": exp.curve.tolist(),
        })
    result.explanations.append({"method": "pdp", "curves": pdp_payload})
    logger.log("explain", f"pdp on top {len(pdp_payload)} feature(s)")

    lime = lime_explain(model, X_te[0], X_background, n_samples=max(2000, p + 2),
                        seed=_derived_seed(config.seed, 9200))
    result.explanations.append({
        "method": "lime",
        "instance": lime.instance.tolist(),
        "attributions": lime.attributions.tolist(),
        "intercept": lime.baseline,
        "fidelity_r2": lime.metadata["fidelity_r2"],
        "degenerate": lime.metadata["degenerate"],
    })
    logger.log("explain", "lime on 1 instance")

    if config.task == "classification":
        preds = model.predict(X_te)
        wrong = np.flatnonzero(preds != y_te)
        idx = int(wrong[0]) if wrong.size else 0
        current = preds[idx]
        others = [c for c in model.classes if c != current]
        desired = y_te[idx] if y_te[idx] != current else others[0]
        cf = counterfactual(model, X_te[idx], desired, X_background,
                            seed=_derived_seed(config.seed, 9300))
        payload = {
            "method": "counterfactual",
            "instance": cf.instance.tolist(),
            "found": cf.metadata["found"],
            "desired_class": int(desired),
            "on_misclassified": bool(wrong.size),
        }
        if cf.metadata["found"]:
            payload["counterfactual"] = cf.metadata["counterfactual"].tolist()
            payload["distance"] = cf.metadata["distance"]
            payload["n_changed"] = cf.metadata["n_changed"]
        result.explanations.append(payload)
        logger.log("explain", "counterfactual search done")


def _run_unsupervised(config: RunConfig, X, result: RunResult, logger: RunLogger):
    values = X.values
    with _stage(logger, "preprocess"):
        onehot_mask = np.array(["=" in n for n in X.feature_names])
        scale_mask = ~onehot_mask
        method = config.scaler or "standard"
        scaled = values.copy()
        if scale_mask.any():
            params = preprocess.fit_scaler(values[:, scale_mask], method)
            scaled[:, scale_mask] = preprocess.transform(values[:, scale_mask], params).values
        result.preprocessing_trace = [
            {"step": "scaler", "method": method, "scaled_features": int(scale_mask.sum())}
        ]

    with _stage(logger, "get_models"):
        algorithms = config.models or ["kmeans", "dbscan", "agglomerative", "gmm"]
        logger.log("get_models", f"clustering: {', '.join(algorithms)}")

    with _stage(logger, "train"):
        n = scaled.shape[0]
        # k chosen by silhouette over {2..5} when the user gives none
        best_k, best_sil = 2, -np.inf
        for k in range(2, min(5, n - 1) + 1):
            res = unsupervised.cluster_kmeans(
                scaled, unsupervised.ClusterSpec(algorithm="kmeans", k=k, seed=config.seed)
            )
            sil = unsupervised.silhouette_score(scaled, res.labels)
            if sil > best_sil + 1e-12:
                best_k, best_sil = k, sil
        dists = np.linalg.norm(scaled[:, None, :] - scaled[None, :, :], axis=2)
        eps = float(np.median(dists[dists > 0])) * 0.5 if n > 1 else 0.5
        for algo in algorithms:
            spec = unsupervised.ClusterSpec(
                algorithm=algo, k=best_k, eps=eps,
                min_pts=min(5, max(2, n // 10)), seed=config.seed,
            )
            res = unsupervised.cluster(scaled, spec)
            result.cluster_results[algo] = {
                "labels": res.labels.tolist(),
                "n_clusters": int(res.labels.max()) + 1 if res.labels.size else 0,
                "silhouette": unsupervised.silhouette_score(scaled, res.labels),
                "inertia": res.inertia,
                "k_auto_selected": config.models is None,
                "params": {"k": best_k, "eps": eps, "min_pts": spec.min_pts,
                           "linkage": spec.linkage},
            }
            logger.log("train", f"{algo}: done")
            if result.cluster_labels_for_plot is None:
                result.cluster_labels_for_plot = res.labels

    with _stage(logger, "visualize"):
        n_comp = min(2, values.shape[1], values.shape[0])
        proj_model = unsupervised.fit_pca(scaled, n_comp)
        result.pca_projection = unsupervised.project(proj_model, scaled)
        result.pca_explained_variance = proj_model.explained_variance
        logger.log("visualize", "pca projection computed")
