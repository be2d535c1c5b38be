import type { DatasetInfo, DatasetSchema, JobInfo, Report, RunConfigDoc } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<never> {
  let code = "Error";
  let message = resp.statusText;
  try {
    const body = await resp.json();
    if (body && body.error) {
      code = body.error;
      message = body.detail ?? body.message ?? code;
      if (body.field) message = `${body.field}: ${message}`;
    }
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(resp.status, code, message);
}

export class ApiClient {
  constructor(private base = "") {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) await parseError(resp);
    return resp.json() as Promise<T>;
  }

  uploadDataset(file: File): Promise<DatasetInfo> {
    const form = new FormData();
    form.append("file", file, file.name);
    return this.json("/api/v1/datasets", { method: "POST", body: form });
  }

  listDatasets(): Promise<DatasetInfo[]> {
    return this.json("/api/v1/datasets");
  }

  getSchema(datasetId: string): Promise<DatasetSchema> {
    return this.json(`/api/v1/datasets/${datasetId}/schema`);
  }

  submitJob(config: RunConfigDoc): Promise<JobInfo> {
    return this.json("/api/v1/jobs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
    });
  }

  getJob(jobId: string): Promise<JobInfo> {
    return this.json(`/api/v1/jobs/${jobId}`);
  }

  getReport(jobId: string): Promise<Report> {
    return this.json(`/api/v1/jobs/${jobId}/report`);
  }

  async getLogTail(jobId: string, lines = 12): Promise<string[]> {
    const resp = await fetch(`${this.base}/api/v1/jobs/${jobId}/log`);
    if (!resp.ok) return [];
    const text = await resp.text();
    return text.trim().split("\n").filter(Boolean).slice(-lines);
  }

  /** `path` is a plot index entry like "figures/roc_curve.svg". */
  figureUrl(jobId: string, path: string): string {
    return `${this.base}/api/v1/jobs/${jobId}/report/${path}`;
  }

  reportUrl(jobId: string): string {
    return `${this.base}/api/v1/jobs/${jobId}/report`;
  }

  logUrl(jobId: string): string {
    return `${this.base}/api/v1/jobs/${jobId}/log`;
  }
}
