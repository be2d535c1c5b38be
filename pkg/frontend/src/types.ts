/** Shapes exchanged with the /api/v1 JSON API. */

export type ColumnKind = "continuous" | "binary" | "categorical";

export interface SchemaColumn {
  name: string;
  kind: ColumnKind;
  missing_count: number;
  distinct_count: number;
}

export interface DatasetSchema {
  columns: SchemaColumn[];
}

export interface DatasetInfo {
  dataset_id: string;
  filename: string;
  bytes: number;
  n_rows: number;
  schema: DatasetSchema;
}

export type JobState = "queued" | "running" | "succeeded" | "failed" | "timed_out";

export interface JobInfo {
  job_id: string;
  dataset_id: string;
  state: JobState;
  report_ready: boolean;
  error: { stage: string; message: string } | null;
}

export interface ModelReportEntry {
  name: string;
  status: string;
  /** Scalar scores plus structured entries such as a confusion matrix. */
  metrics: Record<string, unknown>;
  seconds: number | null;
}

export interface PlotEntry {
  kind: string;
  path: string;
  caption: string;
}

export interface Report {
  version: string;
  run_id: string;
  models: ModelReportEntry[];
  winner: { name: string; final_metrics: Record<string, number> | null } | null;
  clustering: Record<string, unknown> | null;
  explanations: Array<{ method: string; [k: string]: unknown }>;
  plots: PlotEntry[];
  warnings: string[];
  reproducibility: { seed: number; config_hash: string; version: string };
}

/** RunConfig document as accepted by POST /api/v1/jobs. */
export interface RunConfigDoc {
  task: "classification" | "regression" | "unsupervised";
  dataset_id: string;
  target?: string;
  inputs?: string[];
  models?: string[];
  preprocessing?: { scaler?: string; oversample?: string };
  split?: { test_fraction?: number; seed?: number };
  tuning?: { enabled?: boolean; folds?: number };
  notify?: { mode: "file" | "webhook"; address?: string };
}
