import json
import os

import numpy as np
import pytest

from autotab.dataset import read_table
from autotab.errors import ConfigError, InsufficientRowsForFolds, StageError, TooFewRows
from autotab.models.base import ModelSpec
from autotab.pipeline import (
    RunConfig,
    SplitSpec,
    auc_rank,
    classification_metrics,
    grid_search,
    parse_config,
    regression_metrics,
    run_pipeline,
    train_test_split,
)
from conftest import make_blobs

DEMO = os.path.join(os.path.dirname(__file__), "..", "src", "autotab", "data", "demo.csv")


def auc_pair_counting(y, scores):
    """Brute-force Mann-Whitney: count positive-over-negative score pairs."""
    pos = scores[y == 1]
    neg = scores[y == 0]
    wins = ties = 0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1
            elif p == q:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


class TestSplit:
    def test_partition(self):
        X = np.arange(16.0).reshape(8, 2)
        y = np.array([0, 1] * 4)
        Xtr, ytr, Xte, yte, _ = train_test_split(X, y, SplitSpec(test_fraction=0.25, seed=0))
        assert Xtr.shape[0] == 6 and Xte.shape[0] == 2
        combined = np.vstack([Xtr, Xte])
        assert sorted(map(tuple, combined)) == sorted(map(tuple, X))

    def test_stratified_counts(self):
        X = np.zeros((8, 1))
        y = np.array([0] * 4 + [1] * 4)
        _, ytr, _, yte, _ = train_test_split(
            X, y, SplitSpec(test_fraction=0.5, stratified=True, seed=1))
        assert int((yte == 0).sum()) == 2 and int((yte == 1).sum()) == 2

    def test_singleton_class_goes_to_train(self):
        X = np.zeros((5, 1))
        y = np.array([0, 0, 0, 0, 1])
        _, ytr, _, yte, warnings = train_test_split(
            X, y, SplitSpec(test_fraction=0.25, stratified=True, seed=0))
        assert 1 in ytr and 1 not in yte
        assert warnings

    def test_determinism(self):
        X = np.random.default_rng(0).normal(size=(20, 2))
        y = np.array([0, 1] * 10)
        spec = SplitSpec(test_fraction=0.3, seed=7)
        a = train_test_split(X, y, spec)
        b = train_test_split(X, y, spec)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[2], b[2])

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            train_test_split(np.zeros((3, 1)), np.zeros(3), SplitSpec())


class TestMetrics:
    def test_perfect_predictions(self):
        y = np.array([0, 1, 1, 0])
        m = classification_metrics(y, y)
        assert m["accuracy"] == 1.0
        assert m["confusion_matrix"][0][1] == 0
        assert m["confusion_matrix"][1][0] == 0

    def test_constant_probabilities_auc_half(self):
        y = np.array([0, 1, 0, 1])
        proba = np.full((4, 2), 0.5)
        m = classification_metrics(y, np.zeros(4, dtype=int), proba=proba)
        assert m["auc"] == 0.5

    def test_macro_zero_over_zero(self):
        y = np.array([0, 0, 1])
        pred = np.array([0, 0, 0])  # class 1 never predicted
        m = classification_metrics(y, pred)
        assert m["precision_macro"] == pytest.approx(0.5 * (2 / 3 + 0))

    def test_single_class_test_auc_null(self):
        y = np.array([1, 1, 1])
        m = classification_metrics(y, y, proba=np.column_stack([np.zeros(3), np.ones(3)]))
        assert m["auc"] is None
        assert m["accuracy"] == 1.0

    def test_regression_identity(self):
        m = regression_metrics(np.array([1.0, 2, 3]), np.array([1.0, 2, 3]))
        assert m["mse"] == 0.0
        assert m["r2"] == 1.0

    def test_auc_vs_pair_counting(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            n = int(rng.integers(4, 30))
            y = rng.integers(0, 2, n)
            if len(set(y.tolist())) < 2:
                continue
            scores = rng.integers(0, 5, n).astype(float)  # ties likely
            assert auc_rank(y, scores) == auc_pair_counting(y, scores)


class TestGridSearch:
    def test_single_candidate_identity(self, blobs2):
        X, y = blobs2
        template = ModelSpec(algorithm="knn", task="classification",
                             hyperparameters={"k": 5}, seed=0)
        result = grid_search(template, {"k": [3]}, X, y, folds=3, seed=0)
        assert result.best_spec.hyperparameters["k"] == 3

    def test_first_optimal_wins_ties(self, blobs2):
        X, y = blobs2
        template = ModelSpec(algorithm="knn", task="classification",
                             hyperparameters={}, seed=0)
        result = grid_search(template, {"k": [1, 3]}, X, y, folds=4, seed=0)
        scores = {tuple(p.items()): np.mean(s) for p, s in result.candidate_scores}
        best = max(scores.values())
        firsts = [p for p, s in result.candidate_scores if np.mean(s) == best]
        assert result.best_spec.hyperparameters == dict(firsts[0])

    def test_score_count_equals_folds(self, blobs2):
        X, y = blobs2
        template = ModelSpec(algorithm="knn", task="classification",
                             hyperparameters={}, seed=0)
        result = grid_search(template, {"k": [3, 5]}, X, y, folds=5, seed=1)
        for _, scores in result.candidate_scores:
            assert len(scores) == 5

    def test_insufficient_rows(self):
        X = np.zeros((4, 1))
        y = np.array([0, 0, 0, 1])
        template = ModelSpec(algorithm="knn", task="classification",
                             hyperparameters={}, seed=0)
        with pytest.raises(InsufficientRowsForFolds):
            grid_search(template, {"k": [1]}, X, y, folds=3, seed=0)


class TestParseConfig:
    def test_defaults(self):
        cfg = parse_config({"task": "classification", "dataset_id": "d", "target": "t"})
        assert cfg.test_fraction == 0.25
        assert cfg.tuning_folds == 5
        assert cfg.tuning_enabled is True

    def test_missing_target_names_field(self):
        with pytest.raises(ConfigError) as err:
            parse_config({"task": "classification", "dataset_id": "d"})
        assert err.value.field == "target"

    def test_bad_task(self):
        with pytest.raises(ConfigError) as err:
            parse_config({"task": "zot", "dataset_id": "d"})
        assert err.value.field == "task"

    def test_round_trip_jsonable(self):
        doc = {"task": "regression", "dataset_id": "d", "target": "y",
               "preprocessing": {"scaler": "robust"}}
        cfg = parse_config(doc)
        out = cfg.to_jsonable()
        assert out["preprocessing"]["scaler"] == "robust"
        json.dumps(out)  # serializable


class TestRunPipeline:
    def test_unknown_target_wrapped_with_stage(self):
        table = read_table(DEMO)
        cfg = parse_config({"task": "classification", "dataset_id": "d",
                            "target": "nope"})
        with pytest.raises(StageError) as err:
            run_pipeline(cfg, table)
        assert err.value.stage == "encode"

    def test_unsupervised_branch(self):
        table = read_table(DEMO)
        cfg = parse_config({"task": "unsupervised", "dataset_id": "d"})
        result = run_pipeline(cfg, table)
        assert result.winner is None
        assert set(result.cluster_results) >= {"kmeans", "dbscan"}
        assert result.pca_projection is not None
        assert result.pca_projection.shape[1] == 2

    def test_log_covers_stages(self):
        table = read_table(DEMO)
        cfg = parse_config({"task": "unsupervised", "dataset_id": "d"})
        result = run_pipeline(cfg, table)
        stages = result.logger.stages()
        assert {"prepreprocess", "preprocess", "visualize"} <= stages
        times = [r.timestamp for r in result.logger.records]
        assert times == sorted(times)
