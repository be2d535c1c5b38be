import { describe, expect, it } from "vitest";
import {
  deserialize,
  initialState,
  inputCandidates,
  nextStep,
  prevStep,
  serialize,
  stepValid,
  Store,
  withDataset,
  withTarget,
  type WizardState,
} from "../src/state.js";
import type { SchemaColumn } from "../src/types.js";

const COLUMNS: SchemaColumn[] = [
  { name: "alpha", kind: "continuous", missing_count: 0, distinct_count: 120 },
  { name: "beta", kind: "continuous", missing_count: 0, distinct_count: 120 },
  { name: "region", kind: "categorical", missing_count: 0, distinct_count: 3 },
  { name: "outcome", kind: "binary", missing_count: 0, distinct_count: 2 },
];

function predictionState(): WizardState {
  let s = initialState();
  s = { ...s, analysisType: "prediction" };
  s = withDataset(s, "d1", "demo.csv", COLUMNS);
  return withTarget(s, "outcome");
}

describe("step gating", () => {
  it("analysis_type requires a choice before Next", () => {
    const s = initialState();
    expect(stepValid(s)).toBe(false);
    expect(nextStep(s)).toBeNull();
    expect(nextStep({ ...s, analysisType: "prediction" })).toBe("dataset");
  });

  it("dataset step requires a dataset id", () => {
    const s = { ...initialState(), analysisType: "clustering" as const, step: "dataset" as const };
    expect(stepValid(s)).toBe(false);
    expect(stepValid(withDataset(s, "d1", "demo.csv", COLUMNS))).toBe(true);
  });

  it("features step requires a target for prediction", () => {
    let s: WizardState = { ...initialState(), analysisType: "prediction" };
    s = withDataset(s, "d1", "demo.csv", COLUMNS);
    s = { ...s, step: "features" };
    expect(stepValid(s)).toBe(false);
    expect(stepValid(withTarget(s, "outcome"))).toBe(true);
  });

  it("clustering needs no target", () => {
    let s: WizardState = { ...initialState(), analysisType: "clustering" };
    s = withDataset(s, "d1", "demo.csv", COLUMNS);
    s = { ...s, step: "features" };
    expect(s.target).toBeNull();
    expect(stepValid(s)).toBe(true);
  });

  it("zero selected inputs blocks Next", () => {
    const s = { ...predictionState(), step: "features" as const, inputs: [] };
    expect(stepValid(s)).toBe(false);
  });

  it("an empty explicit model subset blocks the run", () => {
    const s = { ...predictionState(), step: "options" as const };
    expect(stepValid(s)).toBe(true);
    expect(stepValid({ ...s, options: { ...s.options, models: [] } })).toBe(false);
  });

  it("no backwards navigation out of a run", () => {
    const s = { ...predictionState(), step: "running" as const };
    expect(prevStep(s)).toBeNull();
    expect(prevStep({ ...s, step: "report" })).toBeNull();
    expect(prevStep({ ...s, step: "options" })).toBe("features");
  });
});

describe("dataset and target selection", () => {
  it("selecting a dataset preselects all columns as inputs", () => {
    const s = withDataset(initialState(), "d1", "demo.csv", COLUMNS);
    expect(s.inputs).toEqual(["alpha", "beta", "region", "outcome"]);
  });

  it("switching datasets resets the target", () => {
    let s = predictionState();
    expect(s.target).toBe("outcome");
    s = withDataset(s, "d2", "other.csv", COLUMNS.slice(0, 2));
    expect(s.target).toBeNull();
  });

  it("re-selecting the same dataset preserves prior choices", () => {
    let s = predictionState();
    s = { ...s, inputs: ["alpha"] };
    s = withDataset(s, "d1", "demo.csv", COLUMNS);
    expect(s.inputs).toEqual(["alpha"]);
    expect(s.target).toBe("outcome");
  });

  it("the target is auto-excluded from the inputs list", () => {
    const s = predictionState();
    expect(s.inputs).not.toContain("outcome");
    expect(inputCandidates(s).map((c) => c.name)).toEqual(["alpha", "beta", "region"]);
  });
});

describe("persistence", () => {
  it("round-trips through serialization", () => {
    const s = { ...predictionState(), step: "options" as const, notifyAddress: "inbox" };
    expect(deserialize(serialize(s))).toEqual(s);
  });

  it("falls back to the initial state on corrupt storage", () => {
    expect(deserialize("{not json")).toEqual(initialState());
  });
});

describe("store", () => {
  it("notifies subscribers and supports unsubscribe", () => {
    const store = new Store();
    const seen: string[] = [];
    const off = store.subscribe((s) => seen.push(s.step));
    store.set({ step: "dataset" });
    off();
    store.set({ step: "features" });
    expect(seen).toEqual(["dataset"]);
    expect(store.get().step).toBe("features");
  });
});
