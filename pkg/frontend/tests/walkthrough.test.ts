// @vitest-environment happy-dom
import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { initialState, Store } from "../src/state.js";
import { renderWizard } from "../src/wizard.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const DEMO_CSV = join(__dirname, "..", "..", "src", "autotab", "data", "demo.csv");

const SERVER_SCRIPT = [
  "import sys, uvicorn",
  "from autotab.service import create_app",
  "app = create_app(sys.argv[1], workers=1)",
  "uvicorn.run(app, host='127.0.0.1', port=int(sys.argv[2]), log_level='warning')",
].join("\n");

let server: ChildProcess;

async function until<T>(fn: () => T | Promise<T>, timeoutMs: number, what: string): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const value = await fn();
      if (value) return value;
    } catch (err) {
      lastError = err;
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error(`timed out waiting for ${what}: ${lastError ?? "condition stayed falsy"}`);
}

beforeAll(async () => {
  const dataRoot = mkdtempSync(join(tmpdir(), "autotab-ui-"));
  server = spawn("python3", ["-c", SERVER_SCRIPT, dataRoot, String(PORT)], {
    stdio: "ignore",
  });
  await until(async () => (await fetch(`${BASE}/api/v1/datasets`)).ok, 30_000, "server start");
  // seed one dataset so the wizard's "pick existing" path has something to offer
  execFileSync("python3", [
    "-c",
    [
      "import requests, sys",
      "with open(sys.argv[2], 'rb') as fh:",
      "    resp = requests.post(sys.argv[1] + '/api/v1/datasets',",
      "                         files={'file': ('demo.csv', fh, 'text/csv')})",
      "assert resp.status_code == 201, resp.text",
    ].join("\n"),
    BASE,
    DEMO_CSV,
  ]);
}, 60_000);

afterAll(() => {
  server?.kill();
});

function click(el: Element | null): void {
  if (!el) throw new Error("expected element missing");
  (el as HTMLElement).click();
}

function buttonByText(root: Element, text: string): HTMLButtonElement | null {
  return (
    [...root.querySelectorAll("button")].find((b) => b.textContent === text) ?? null
  );
}

describe("full wizard walkthrough against a live service", () => {
  it(
    "reaches the report step with one metrics row per model",
    async () => {
      const root = document.createElement("div");
      document.body.appendChild(root);
      const store = new Store(initialState());
      const api = new ApiClient(BASE);
      renderWizard(root, store, api);

      // step 1: analysis type
      click(root.querySelector('input[name="analysis-type"]'));
      expect(store.get().analysisType).toBe("prediction");
      click(buttonByText(root, "Next"));

      // step 2: pick the seeded dataset from the listing
      const datasetRadio = await until(
        () => root.querySelector('input[name="dataset"]'),
        10_000,
        "dataset listing",
      );
      click(datasetRadio);
      expect(store.get().datasetId).toBeTruthy();
      click(buttonByText(root, "Next"));

      // step 3: choose the target column
      const select = root.querySelector("select") as HTMLSelectElement;
      select.value = "outcome";
      select.dispatchEvent(new Event("change"));
      expect(store.get().target).toBe("outcome");
      click(buttonByText(root, "Next"));

      // step 4: defaults untouched; run
      expect(store.get().step).toBe("options");
      click(buttonByText(root, "Run analysis"));

      // the poll loop advances to the report step on success
      await until(() => store.get().step === "report", 240_000, "job completion");
      const table = await until(
        () => root.querySelector(".metrics-table"),
        10_000,
        `metrics table (report body: ${root.querySelector(".report-body")?.innerHTML})`,
      );

      const report = await api.getReport(store.get().jobId!);
      const rows = table!.querySelectorAll("tbody tr");
      expect(rows.length).toBe(report.models.length);
      expect(report.models.length).toBe(7);
      expect(report.winner).not.toBeNull();
    },
    300_000,
  );
});
