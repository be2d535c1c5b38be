// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { metricColumns, metricsRows, renderReport, sortRows } from "../src/report.js";
import type { Report } from "../src/types.js";

function sampleReport(): Report {
  return {
    version: "1",
    run_id: "r1",
    models: [
      { name: "knn", status: "ok", metrics: { accuracy: 0.9, f1_macro: 0.88 }, seconds: null },
      { name: "svm", status: "ok", metrics: { accuracy: 0.95, f1_macro: 0.93 }, seconds: null },
      { name: "mlp", status: "timed_out", metrics: {}, seconds: null },
    ],
    winner: { name: "svm", final_metrics: { accuracy: 0.95 } },
    clustering: null,
    explanations: [{ method: "shap" }, { method: "pdp" }],
    plots: [{ kind: "confusion_heatmap", path: "figures/confusion_heatmap.svg", caption: "" }],
    warnings: [],
    reproducibility: { seed: 0, config_hash: "abcdef0123456789", version: "1" },
  };
}

describe("metrics table data", () => {
  it("produces one row per model in the report", () => {
    const report = sampleReport();
    expect(metricsRows(report)).toHaveLength(report.models.length);
  });

  it("collects metric columns in first-seen order", () => {
    expect(metricColumns(sampleReport().models)).toEqual(["accuracy", "f1_macro"]);
  });

  it("sorts by a metric with missing values last", () => {
    const rows = metricsRows(sampleReport());
    const descending = sortRows(rows, "accuracy", true).map((r) => r.name);
    expect(descending).toEqual(["svm", "knn", "mlp"]);
    const ascending = sortRows(rows, "accuracy", false).map((r) => r.name);
    expect(ascending).toEqual(["knn", "svm", "mlp"]);
  });
});

describe("report rendering", () => {
  function render(report: Report): HTMLElement {
    const root = document.createElement("div");
    renderReport(root, report, "job-1", new ApiClient("http://example.test"));
    return root;
  }

  it("renders a metrics row for every model, winner highlighted", () => {
    const report = sampleReport();
    const root = render(report);
    const rows = root.querySelectorAll(".metrics-table tbody tr");
    expect(rows.length).toBe(report.models.length);
    expect(root.querySelector("tr.winner .model-name")?.textContent).toBe("svm");
  });

  it("omits absent sections without error", () => {
    const report = { ...sampleReport(), plots: [], explanations: [], winner: null };
    const root = render(report);
    expect(root.querySelector(".figure-gallery")).toBeNull();
    expect(root.querySelector(".winner-banner")).toBeNull();
    expect(root.querySelectorAll(".metrics-table tbody tr").length).toBe(3);
  });

  it("points figures and downloads at the job's API routes", () => {
    const root = render(sampleReport());
    const img = root.querySelector(".figure-gallery img") as HTMLImageElement;
    expect(img.getAttribute("src")).toBe(
      "http://example.test/api/v1/jobs/job-1/report/figures/confusion_heatmap.svg",
    );
    const links = [...root.querySelectorAll(".downloads a")].map((a) => a.getAttribute("href"));
    expect(links).toEqual([
      "http://example.test/api/v1/jobs/job-1/report",
      "http://example.test/api/v1/jobs/job-1/log",
    ]);
  });

  it("re-rendering the same report yields identical DOM", () => {
    const a = render(sampleReport());
    const b = render(sampleReport());
    expect(a.innerHTML).toBe(b.innerHTML);
  });
});
