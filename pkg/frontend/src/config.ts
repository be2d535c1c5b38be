import type { RunConfigDoc } from "./types.js";
import type { OversampleChoice, ScalerChoice, WizardOptions, WizardState } from "./state.js";
import { DEFAULT_OPTIONS } from "./state.js";

export const CLASSIFIER_NAMES = [
  "logistic_regression",
  "svm",
  "knn",
  "naive_bayes",
  "random_forest",
  "gradient_boosting",
  "mlp",
];

export const REGRESSOR_NAMES = [
  "linear_regression",
  "knn",
  "random_forest",
  "gradient_boosting",
  "mlp",
];

export const CLUSTERING_NAMES = ["kmeans", "dbscan", "agglomerative", "gmm"];

export const SCALER_CHOICES: ScalerChoice[] = [
  "automatic",
  "standard",
  "robust",
  "unit_norm",
  "power",
  "quantile",
];

export const OVERSAMPLE_CHOICES: OversampleChoice[] = [
  "automatic",
  "random",
  "smote",
  "none",
];

/**
 * The service distinguishes classification from regression; the wizard asks
 * only for "prediction" and resolves the split from the target column kind.
 */
export function resolveTask(state: WizardState): RunConfigDoc["task"] {
  if (state.analysisType === "prediction") {
    const target = state.columns.find((c) => c.name === state.target);
    return target?.kind === "continuous" ? "regression" : "classification";
  }
  return "unsupervised";
}

export function modelChoices(state: WizardState): string[] {
  const task = resolveTask(state);
  if (task === "classification") return CLASSIFIER_NAMES;
  if (task === "regression") return REGRESSOR_NAMES;
  return CLUSTERING_NAMES;
}

/**
 * Build the RunConfig document submitted to POST /api/v1/jobs. Untouched
 * option panels are omitted so the server applies its automatic policies.
 */
export function buildRunConfig(state: WizardState): RunConfigDoc {
  if (!state.datasetId) throw new Error("no dataset selected");
  const task = resolveTask(state);
  const opts = state.options;

  const config: RunConfigDoc = { task, dataset_id: state.datasetId };

  if (task !== "unsupervised") {
    if (!state.target) throw new Error("no target selected");
    config.target = state.target;
  }
  const allInputs = state.columns
    .map((c) => c.name)
    .filter((n) => n !== state.target);
  if (state.inputs.length > 0 && state.inputs.length < allInputs.length) {
    config.inputs = state.inputs;
  }
  if (opts.models !== null) config.models = opts.models;

  const preprocessing: NonNullable<RunConfigDoc["preprocessing"]> = {};
  if (opts.scaler !== "automatic") preprocessing.scaler = opts.scaler;
  if (opts.oversample !== "automatic" && task === "classification") {
    preprocessing.oversample = opts.oversample;
  }
  if (Object.keys(preprocessing).length > 0) config.preprocessing = preprocessing;

  const split: NonNullable<RunConfigDoc["split"]> = {};
  if (opts.testFraction !== DEFAULT_OPTIONS.testFraction) {
    split.test_fraction = opts.testFraction;
  }
  if (opts.seed !== DEFAULT_OPTIONS.seed) split.seed = opts.seed;
  if (Object.keys(split).length > 0) config.split = split;

  if (!opts.tuningEnabled || opts.tuningFolds !== DEFAULT_OPTIONS.tuningFolds) {
    config.tuning = { enabled: opts.tuningEnabled, folds: opts.tuningFolds };
  }

  if (state.notifyAddress.trim()) {
    const address = state.notifyAddress.trim();
    config.notify = address.startsWith("http")
      ? { mode: "webhook", address }
      : { mode: "file", address };
  }

  return config;
}

/**
 * Every options combination the wizard can reach for one dataset, used to
 * contract-test client-side construction against the server validator.
 */
export function enumerateOptionCombinations(base: WizardState): WizardState[] {
  const states: WizardState[] = [];
  const modelSubsets: Array<string[] | null> = [
    null,
    modelChoices(base).slice(0, 2),
  ];
  for (const scaler of SCALER_CHOICES) {
    for (const oversample of OVERSAMPLE_CHOICES) {
      for (const tuningEnabled of [true, false]) {
        for (const models of modelSubsets) {
          for (const notifyAddress of ["", "out", "http://localhost:1/hook"]) {
            const options: WizardOptions = {
              ...DEFAULT_OPTIONS,
              scaler,
              oversample,
              tuningEnabled,
              models,
            };
            states.push({ ...base, options, notifyAddress });
          }
        }
      }
    }
  }
  return states;
}
