import type { JobState, SchemaColumn } from "./types.js";

export type AnalysisType = "prediction" | "clustering" | "visualization";

export type Step =
  | "analysis_type"
  | "dataset"
  | "features"
  | "options"
  | "running"
  | "report";

export const STEP_ORDER: Step[] = [
  "analysis_type",
  "dataset",
  "features",
  "options",
  "running",
  "report",
];

export type ScalerChoice = "automatic" | "standard" | "robust" | "unit_norm" | "power" | "quantile";
export type OversampleChoice = "automatic" | "random" | "smote" | "none";

export interface WizardOptions {
  scaler: ScalerChoice;
  oversample: OversampleChoice;
  models: string[] | null; // null = full catalog
  tuningEnabled: boolean;
  tuningFolds: number;
  testFraction: number;
  seed: number;
}

export interface WizardState {
  step: Step;
  analysisType: AnalysisType | null;
  datasetId: string | null;
  datasetName: string | null;
  columns: SchemaColumn[];
  inputs: string[];
  target: string | null;
  notifyAddress: string;
  options: WizardOptions;
  jobId: string | null;
  jobState: JobState | null;
}

export const DEFAULT_OPTIONS: WizardOptions = {
  scaler: "automatic",
  oversample: "automatic",
  models: null,
  tuningEnabled: true,
  tuningFolds: 5,
  testFraction: 0.25,
  seed: 0,
};

export function initialState(): WizardState {
  return {
    step: "analysis_type",
    analysisType: null,
    datasetId: null,
    datasetName: null,
    columns: [],
    inputs: [],
    target: null,
    notifyAddress: "",
    options: { ...DEFAULT_OPTIONS },
    jobId: null,
    jobState: null,
  };
}

export function isSupervised(state: WizardState): boolean {
  return state.analysisType === "prediction";
}

/** Columns offered as model inputs: everything except the chosen target. */
export function inputCandidates(state: WizardState): SchemaColumn[] {
  return state.columns.filter((c) => c.name !== state.target);
}

/** Whether the current step's requirements are met, gating Next. */
export function stepValid(state: WizardState): boolean {
  switch (state.step) {
    case "analysis_type":
      return state.analysisType !== null;
    case "dataset":
      return state.datasetId !== null;
    case "features":
      if (state.inputs.length === 0) return false;
      return isSupervised(state) ? state.target !== null : true;
    case "options":
      return (
        state.options.tuningFolds >= 2 &&
        state.options.testFraction > 0 &&
        state.options.testFraction < 1 &&
        (state.options.models === null || state.options.models.length > 0)
      );
    case "running":
      return state.jobState === "succeeded";
    case "report":
      return false;
  }
}

export function nextStep(state: WizardState): Step | null {
  if (!stepValid(state)) return null;
  const idx = STEP_ORDER.indexOf(state.step);
  return idx < STEP_ORDER.length - 1 ? STEP_ORDER[idx + 1] : null;
}

export function prevStep(state: WizardState): Step | null {
  if (state.step === "running" || state.step === "report") return null;
  const idx = STEP_ORDER.indexOf(state.step);
  return idx > 0 ? STEP_ORDER[idx - 1] : null;
}

/** Select a dataset, resetting downstream choices that depended on the old one. */
export function withDataset(
  state: WizardState,
  datasetId: string,
  datasetName: string,
  columns: SchemaColumn[],
): WizardState {
  const changed = state.datasetId !== datasetId;
  return {
    ...state,
    datasetId,
    datasetName,
    columns,
    inputs: changed ? columns.map((c) => c.name) : state.inputs,
    target: changed ? null : state.target,
  };
}

/** Pick the prediction target; it is removed from the input list. */
export function withTarget(state: WizardState, target: string | null): WizardState {
  const inputs =
    target === null ? state.inputs : state.inputs.filter((n) => n !== target);
  return { ...state, target, inputs };
}

// --- persistence ------------------------------------------------------------

const STORAGE_KEY = "autotab-wizard";

export function serialize(state: WizardState): string {
  return JSON.stringify(state);
}

export function deserialize(raw: string): WizardState {
  const base = initialState();
  try {
    const parsed = JSON.parse(raw) as Partial<WizardState>;
    return {
      ...base,
      ...parsed,
      options: { ...base.options, ...(parsed.options ?? {}) },
    };
  } catch {
    return base;
  }
}

export function saveState(state: WizardState, storage: Pick<Storage, "setItem"> = sessionStorage): void {
  storage.setItem(STORAGE_KEY, serialize(state));
}

export function loadState(storage: Pick<Storage, "getItem"> = sessionStorage): WizardState {
  const raw = storage.getItem(STORAGE_KEY);
  return raw ? deserialize(raw) : initialState();
}

// --- store ------------------------------------------------------------------

export type Listener = (state: WizardState) => void;

export class Store {
  private listeners: Listener[] = [];

  constructor(private state: WizardState = initialState()) {}

  get(): WizardState {
    return this.state;
  }

  set(patch: Partial<WizardState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  replace(state: WizardState): void {
    this.state = state;
    for (const fn of this.listeners) fn(this.state);
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }
}
