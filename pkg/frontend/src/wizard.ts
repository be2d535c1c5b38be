import { ApiClient, ApiError } from "./api.js";
import { buildRunConfig, modelChoices, OVERSAMPLE_CHOICES, SCALER_CHOICES } from "./config.js";
import { renderReport } from "./report.js";
import {
  inputCandidates,
  isSupervised,
  nextStep,
  prevStep,
  saveState,
  STEP_ORDER,
  stepValid,
  Store,
  withDataset,
  withTarget,
  type AnalysisType,
  type Step,
} from "./state.js";
import type { DatasetInfo } from "./types.js";

const STEP_TITLES: Record<Step, string> = {
  analysis_type: "Analysis",
  dataset: "Dataset",
  features: "Features",
  options: "Options",
  running: "Run",
  report: "Report",
};

const POLL_INTERVAL_MS = 2000;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function errorBanner(message: string): HTMLElement {
  return el("div", "error-banner", message);
}

export function renderWizard(root: HTMLElement, store: Store, api: ApiClient): void {
  const container = el("div", "wizard");
  const nav = el("nav", "wizard-nav");
  const content = el("section", "wizard-content");
  const controls = el("div", "wizard-controls");
  container.appendChild(nav);
  container.appendChild(content);
  container.appendChild(controls);
  root.appendChild(container);

  let pollTimer: ReturnType<typeof setTimeout> | null = null;

  function stopPolling() {
    if (pollTimer !== null) clearTimeout(pollTimer);
    pollTimer = null;
  }

  async function pollOnce() {
    const s = store.get();
    if (!s.jobId || s.step !== "running") return;
    try {
      const job = await api.getJob(s.jobId);
      store.set({ jobState: job.state });
      if (job.state === "succeeded") {
        store.set({ step: "report" });
        return;
      }
      if (job.state === "failed" || job.state === "timed_out") {
        const message = job.error
          ? `stage ${job.error.stage}: ${job.error.message}`
          : job.state;
        renderRunError(message);
        return;
      }
      const tail = await api.getLogTail(s.jobId);
      renderLogTail(tail);
    } catch {
      /* transient poll failure: try again next tick */
    }
    pollTimer = setTimeout(pollOnce, POLL_INTERVAL_MS);
  }

  function startPolling() {
    stopPolling();
    pollTimer = setTimeout(pollOnce, 0);
  }

  function renderLogTail(lines: string[]) {
    const pre = content.querySelector(".log-tail");
    if (!pre) return;
    pre.textContent = lines
      .map((line) => {
        try {
          const rec = JSON.parse(line);
          return `[${rec.stage}] ${rec.message}`;
        } catch {
          return line;
        }
      })
      .join("\n");
  }

  function renderRunError(message: string) {
    const panel = content.querySelector(".run-status");
    if (!panel) return;
    panel.innerHTML = "";
    panel.appendChild(errorBanner(message));
    const retry = el("button", undefined, "Back to options");
    retry.addEventListener("click", () => {
      store.set({ step: "options", jobId: null, jobState: null });
    });
    panel.appendChild(retry);
  }

  // --- steps ----------------------------------------------------------------

  function stepAnalysisType() {
    const s = store.get();
    content.appendChild(el("h2", undefined, "What kind of analysis?"));
    const choices: Array<[AnalysisType, string]> = [
      ["prediction", "Prediction — learn to predict a target column"],
      ["clustering", "Clustering — group similar rows"],
      ["visualization", "Visualization — project and plot the data"],
    ];
    for (const [value, label] of choices) {
      const row = el("label", "choice-row");
      const radio = el("input");
      radio.type = "radio";
      radio.name = "analysis-type";
      radio.checked = s.analysisType === value;
      radio.addEventListener("change", () => store.set({ analysisType: value }));
      row.appendChild(radio);
      row.appendChild(document.createTextNode(" " + label));
      content.appendChild(row);
    }
  }

  function datasetRow(info: DatasetInfo): HTMLElement {
    const s = store.get();
    const row = el("label", "choice-row");
    const radio = el("input");
    radio.type = "radio";
    radio.name = "dataset";
    radio.checked = s.datasetId === info.dataset_id;
    radio.addEventListener("change", () => {
      store.replace(
        withDataset(store.get(), info.dataset_id, info.filename, info.schema.columns),
      );
    });
    row.appendChild(radio);
    row.appendChild(
      document.createTextNode(` ${info.filename} (${info.n_rows} rows)`),
    );
    return row;
  }

  function schemaPreview(): HTMLElement | null {
    const s = store.get();
    if (s.columns.length === 0) return null;
    const table = el("table", "schema-table");
    const head = el("tr");
    for (const title of ["column", "kind", "distinct", "missing"]) {
      head.appendChild(el("th", undefined, title));
    }
    table.appendChild(head);
    for (const col of s.columns) {
      const tr = el("tr");
      tr.appendChild(el("td", undefined, col.name));
      tr.appendChild(el("td", `kind-${col.kind}`, col.kind));
      tr.appendChild(el("td", "num", String(col.distinct_count)));
      tr.appendChild(el("td", "num", String(col.missing_count)));
      table.appendChild(tr);
    }
    return table;
  }

  function stepDataset() {
    content.appendChild(el("h2", undefined, "Choose your data"));

    const uploadRow = el("div", "upload-row");
    const input = el("input");
    input.type = "file";
    input.accept = ".csv,.tsv,text/csv";
    const status = el("span", "upload-status");
    input.addEventListener("change", async () => {
      const file = input.files?.[0];
      if (!file) return;
      status.textContent = "uploading…";
      try {
        const info = await api.uploadDataset(file);
        store.replace(
          withDataset(store.get(), info.dataset_id, info.filename, info.schema.columns),
        );
      } catch (err) {
        status.textContent = "";
        const message = err instanceof ApiError ? err.message : String(err);
        content.insertBefore(errorBanner(`Upload failed: ${message}`), uploadRow);
      }
    });
    uploadRow.appendChild(input);
    uploadRow.appendChild(status);
    content.appendChild(uploadRow);

    const existing = el("div", "dataset-list");
    existing.appendChild(el("p", undefined, "…or pick a previous upload:"));
    content.appendChild(existing);
    api
      .listDatasets()
      .then((datasets) => {
        if (datasets.length === 0) {
          existing.appendChild(el("p", "muted", "none yet"));
          return;
        }
        for (const info of datasets) existing.appendChild(datasetRow(info));
      })
      .catch(() => existing.appendChild(errorBanner("Could not list datasets.")));

    const preview = schemaPreview();
    if (preview) {
      content.appendChild(el("h3", undefined, "Schema"));
      content.appendChild(preview);
    }
  }

  function stepFeatures() {
    const s = store.get();
    content.appendChild(el("h2", undefined, "Select features"));

    if (isSupervised(s)) {
      content.appendChild(el("h3", undefined, "Target"));
      const select = el("select");
      const blank = el("option", undefined, "— choose a target —");
      blank.value = "";
      select.appendChild(blank);
      for (const col of s.columns) {
        const option = el("option", undefined, `${col.name} (${col.kind})`);
        option.value = col.name;
        option.selected = s.target === col.name;
        select.appendChild(option);
      }
      select.addEventListener("change", () => {
        store.replace(withTarget(store.get(), select.value || null));
      });
      content.appendChild(select);
    }

    content.appendChild(el("h3", undefined, "Inputs"));
    for (const col of inputCandidates(s)) {
      const row = el("label", "choice-row");
      const box = el("input");
      box.type = "checkbox";
      box.checked = s.inputs.includes(col.name);
      box.addEventListener("change", () => {
        const current = store.get();
        const inputs = box.checked
          ? [...current.inputs, col.name]
          : current.inputs.filter((n) => n !== col.name);
        store.set({ inputs });
      });
      row.appendChild(box);
      row.appendChild(document.createTextNode(` ${col.name} (${col.kind})`));
      content.appendChild(row);
    }

    content.appendChild(el("h3", undefined, "Notification address (optional)"));
    const notify = el("input");
    notify.type = "text";
    notify.placeholder = "webhook URL or outbox name";
    notify.value = s.notifyAddress;
    notify.addEventListener("change", () => store.set({ notifyAddress: notify.value }));
    content.appendChild(notify);
  }

  function stepOptions() {
    const s = store.get();
    content.appendChild(el("h2", undefined, "Options"));
    content.appendChild(
      el("p", "muted", "All defaults are automatic — you can leave this page untouched."),
    );

    const scalerLabel = el("label", "option-row", "Scaler ");
    const scaler = el("select");
    for (const choice of SCALER_CHOICES) {
      const option = el("option", undefined, choice);
      option.selected = s.options.scaler === choice;
      scaler.appendChild(option);
    }
    scaler.addEventListener("change", () => {
      store.set({ options: { ...store.get().options, scaler: SCALER_CHOICES[scaler.selectedIndex] } });
    });
    scalerLabel.appendChild(scaler);
    content.appendChild(scalerLabel);

    if (isSupervised(s)) {
      const overLabel = el("label", "option-row", "Class balancing ");
      const over = el("select");
      for (const choice of OVERSAMPLE_CHOICES) {
        const option = el("option", undefined, choice);
        option.selected = s.options.oversample === choice;
        over.appendChild(option);
      }
      over.addEventListener("change", () => {
        store.set({
          options: { ...store.get().options, oversample: OVERSAMPLE_CHOICES[over.selectedIndex] },
        });
      });
      overLabel.appendChild(over);
      content.appendChild(overLabel);

      const tuningRow = el("label", "option-row");
      const tuning = el("input");
      tuning.type = "checkbox";
      tuning.checked = s.options.tuningEnabled;
      tuning.addEventListener("change", () => {
        store.set({ options: { ...store.get().options, tuningEnabled: tuning.checked } });
      });
      tuningRow.appendChild(tuning);
      tuningRow.appendChild(document.createTextNode(" hyperparameter tuning"));
      content.appendChild(tuningRow);
    }

    content.appendChild(el("h3", undefined, "Models"));
    const catalog = modelChoices(s);
    const selected = s.options.models;
    for (const name of catalog) {
      const row = el("label", "choice-row");
      const box = el("input");
      box.type = "checkbox";
      box.checked = selected === null || selected.includes(name);
      box.addEventListener("change", () => {
        const current = store.get();
        const active = current.options.models ?? [...catalog];
        const models = box.checked
          ? [...active, name].filter((n, i, a) => a.indexOf(n) === i)
          : active.filter((n) => n !== name);
        store.set({
          options: {
            ...current.options,
            models: models.length === catalog.length ? null : models,
          },
        });
      });
      row.appendChild(box);
      row.appendChild(document.createTextNode(" " + name));
      content.appendChild(row);
    }
  }

  function stepRunning() {
    const s = store.get();
    content.appendChild(el("h2", undefined, "Running"));
    const panel = el("div", "run-status");
    panel.appendChild(el("p", undefined, `job ${s.jobId ?? "?"} — ${s.jobState ?? "queued"}`));
    panel.appendChild(el("pre", "log-tail"));
    content.appendChild(panel);
    startPolling();
  }

  function stepReport() {
    const s = store.get();
    content.appendChild(el("h2", undefined, "Report"));
    const body = el("div", "report-body");
    content.appendChild(body);
    if (!s.jobId) {
      body.appendChild(errorBanner("No job to report on."));
      return;
    }
    api
      .getReport(s.jobId)
      .then((report) => renderReport(body, report, s.jobId!, api))
      .catch((err) => {
        const message = err instanceof ApiError ? err.message : String(err);
        body.appendChild(errorBanner(`Could not load report: ${message}`));
      });

    const again = el("button", undefined, "Start a new analysis");
    again.addEventListener("click", () => {
      stopPolling();
      store.set({ step: "analysis_type", jobId: null, jobState: null });
    });
    content.appendChild(again);
  }

  async function submitAndRun() {
    const s = store.get();
    try {
      const job = await api.submitJob(buildRunConfig(s));
      store.set({ step: "running", jobId: job.job_id, jobState: job.state });
    } catch (err) {
      const message = err instanceof ApiError ? err.message : String(err);
      content.appendChild(errorBanner(`Submission rejected: ${message}`));
    }
  }

  const STEP_RENDERERS: Record<Step, () => void> = {
    analysis_type: stepAnalysisType,
    dataset: stepDataset,
    features: stepFeatures,
    options: stepOptions,
    running: stepRunning,
    report: stepReport,
  };

  // --- chrome ---------------------------------------------------------------

  function renderNav() {
    const s = store.get();
    nav.innerHTML = "";
    const currentIdx = STEP_ORDER.indexOf(s.step);
    STEP_ORDER.forEach((step, idx) => {
      const button = el("button", undefined, `${idx + 1}. ${STEP_TITLES[step]}`);
      // backwards navigation only, and never out of an active run
      button.disabled = idx >= currentIdx || s.step === "running";
      if (idx === currentIdx) button.classList.add("active");
      button.addEventListener("click", () => {
        if (!button.disabled) store.set({ step });
      });
      nav.appendChild(button);
    });
  }

  function renderControls() {
    const s = store.get();
    controls.innerHTML = "";
    const back = prevStep(s);
    if (back) {
      const button = el("button", undefined, "Back");
      button.addEventListener("click", () => store.set({ step: back }));
      controls.appendChild(button);
    }
    if (s.step === "options") {
      const run = el("button", "primary", "Run analysis");
      run.disabled = !stepValid(s);
      run.addEventListener("click", submitAndRun);
      controls.appendChild(run);
    } else if (s.step !== "running" && s.step !== "report") {
      const next = el("button", "primary", "Next");
      next.disabled = nextStep(s) === null;
      next.addEventListener("click", () => {
        const target = nextStep(store.get());
        if (target) store.set({ step: target });
      });
      controls.appendChild(next);
    }
  }

  let renderedKey: string | null = null;

  function sync() {
    const s = store.get();
    saveState(s);
    renderNav();
    renderControls();
    // re-render the step body only when its structure changes, so checkbox
    // toggles and poll ticks don't rebuild the DOM under the user
    const key = JSON.stringify([s.step, s.analysisType, s.datasetId, s.target]);
    if (key !== renderedKey) {
      renderedKey = key;
      if (s.step !== "running") stopPolling();
      content.innerHTML = "";
      STEP_RENDERERS[s.step]();
    }
  }

  store.subscribe(sync);
  sync();
  if (store.get().step === "running") startPolling();
}
