import type { ApiClient } from "./api.js";
import type { ModelReportEntry, Report } from "./types.js";

export interface MetricsRow {
  name: string;
  status: string;
  values: Record<string, unknown>;
}

/**
 * Union of scalar metric names across models, in first-seen order; structured
 * entries like confusion matrices are plotted, not tabled.
 */
export function metricColumns(models: ModelReportEntry[]): string[] {
  const seen: string[] = [];
  for (const model of models) {
    for (const [key, value] of Object.entries(model.metrics ?? {})) {
      if ((typeof value === "number" || value === null) && !seen.includes(key)) {
        seen.push(key);
      }
    }
  }
  return seen;
}

/** One table row per model in the report, regardless of status. */
export function metricsRows(report: Report): MetricsRow[] {
  return report.models.map((model) => ({
    name: model.name,
    status: model.status,
    values: model.metrics ?? {},
  }));
}

export function sortRows(
  rows: MetricsRow[],
  key: string,
  descending: boolean,
): MetricsRow[] {
  return [...rows].sort((a, b) => {
    if (key === "name") return a.name.localeCompare(b.name);
    const av = a.values[key];
    const bv = b.values[key];
    const aNum = typeof av === "number";
    const bNum = typeof bv === "number";
    if (!aNum && !bNum) return 0;
    if (!aNum) return 1; // missing values sink to the bottom either way
    if (!bNum) return -1;
    return descending ? (bv as number) - (av as number) : (av as number) - (bv as number);
  });
}

function formatValue(value: unknown): string {
  if (typeof value !== "number") return "—";
  return Number.isInteger(value) ? String(value) : value.toFixed(4);
}

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

function renderMetricsTable(report: Report): HTMLElement {
  const columns = metricColumns(report.models);
  let rows = metricsRows(report);
  let sortKey = "name";
  let descending = false;

  const table = el("table", "metrics-table");
  const thead = el("thead");
  const tbody = el("tbody");
  table.appendChild(thead);
  table.appendChild(tbody);

  function renderBody() {
    tbody.innerHTML = "";
    for (const row of sortRows(rows, sortKey, descending)) {
      const tr = el("tr");
      if (report.winner && row.name === report.winner.name) tr.classList.add("winner");
      tr.appendChild(el("td", "model-name", row.name));
      tr.appendChild(el("td", `status-${row.status}`, row.status));
      for (const col of columns) tr.appendChild(el("td", "num", formatValue(row.values[col])));
      tbody.appendChild(tr);
    }
  }

  const headRow = el("tr");
  for (const col of ["name", "status", ...columns]) {
    const th = el("th", undefined, col);
    if (col !== "status") {
      th.classList.add("sortable");
      th.addEventListener("click", () => {
        descending = sortKey === col ? !descending : col !== "name";
        sortKey = col;
        renderBody();
      });
    }
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  renderBody();
  return table;
}

export function renderReport(
  root: HTMLElement,
  report: Report,
  jobId: string,
  api: ApiClient,
): void {
  root.innerHTML = "";

  if (report.winner) {
    const banner = el("div", "winner-banner");
    banner.appendChild(el("strong", undefined, report.winner.name));
    banner.appendChild(
      document.createTextNode(" selected as the best model for this run."),
    );
    root.appendChild(banner);
  }

  root.appendChild(el("h3", undefined, "Models"));
  root.appendChild(renderMetricsTable(report));

  if (report.clustering && Object.keys(report.clustering).length > 0) {
    root.appendChild(el("h3", undefined, "Clustering"));
    const pre = el("pre", "clustering-json");
    pre.textContent = JSON.stringify(report.clustering, null, 2);
    root.appendChild(pre);
  }

  if (report.plots.length > 0) {
    root.appendChild(el("h3", undefined, "Figures"));
    const gallery = el("div", "figure-gallery");
    for (const plot of report.plots) {
      const figure = el("figure");
      const img = el("img");
      img.src = api.figureUrl(jobId, plot.path);
      img.alt = plot.kind;
      figure.appendChild(img);
      figure.appendChild(el("figcaption", undefined, plot.caption || plot.kind));
      gallery.appendChild(figure);
    }
    root.appendChild(gallery);
  }

  if (report.explanations.length > 0) {
    root.appendChild(el("h3", undefined, "Explanations"));
    const list = el("ul", "explanation-list");
    for (const exp of report.explanations) {
      list.appendChild(el("li", undefined, exp.method));
    }
    root.appendChild(list);
  }

  if (report.warnings.length > 0) {
    root.appendChild(el("h3", undefined, "Warnings"));
    const list = el("ul", "warning-list");
    for (const warning of report.warnings) list.appendChild(el("li", undefined, warning));
    root.appendChild(list);
  }

  const downloads = el("p", "downloads");
  const reportLink = el("a", undefined, "Download report.json");
  reportLink.href = api.reportUrl(jobId);
  const logLink = el("a", undefined, "Download run log");
  logLink.href = api.logUrl(jobId);
  downloads.appendChild(reportLink);
  downloads.appendChild(document.createTextNode(" · "));
  downloads.appendChild(logLink);
  root.appendChild(downloads);

  const repro = el(
    "p",
    "repro-note",
    `seed ${report.reproducibility.seed} · config ${report.reproducibility.config_hash.slice(0, 12)}`,
  );
  root.appendChild(repro);
}
