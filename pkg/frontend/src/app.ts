/** The comparison view: filter bar, prediction chart over observed points,
 * detail panel driven by hover (sticky on click, cleared by Escape), and
 * the score-ranked model table. */

import { ApiClient, ApiError } from "./api.js";
import { buildSeries, renderComparisonChart, renderDetailPanel } from "./chart.js";
import type { ChartSeries } from "./chart.js";
import { colorAssignments } from "./colors.js";
import { renderModelTable, sortRows } from "./table.js";
import type { ScoreCell, TableRow } from "./table.js";
import type { Filters, Metric, ModelRecord, PredictionRecord } from "./types.js";

const DISEASES = ["dengue", "zika", "chikungunya"];
const SEASON_DAYS = 364;

function shiftDays(date: string, days: number): string {
  const t = new Date(Date.parse(date) + days * 86_400_000);
  return t.toISOString().slice(0, 10);
}

/** Default window: the most recent season (52 weeks) with uploaded rows. */
export function defaultWindow(predictions: PredictionRecord[]): { start?: string; end?: string } {
  let last: string | undefined;
  for (const p of predictions) {
    for (const row of p.prediction) {
      if (last === undefined || row.date > last) last = row.date;
    }
  }
  if (last === undefined) return {};
  return { start: shiftDays(last, -SEASON_DAYS), end: last };
}

function intersects(p: PredictionRecord, start?: string, end?: string): boolean {
  return p.prediction.some(
    (row) => (start === undefined || row.date >= start) && (end === undefined || row.date <= end),
  );
}

function dominantUf(predictions: PredictionRecord[]): string {
  const counts = new Map<string, number>();
  for (const p of predictions) {
    for (const row of p.prediction) {
      if (row.adm_1) counts.set(row.adm_1, (counts.get(row.adm_1) ?? 0) + 1);
    }
  }
  let best = "";
  let bestCount = 0;
  for (const [uf, count] of counts.entries()) {
    if (count > bestCount) {
      best = uf;
      bestCount = count;
    }
  }
  return best;
}

interface ViewState {
  filters: Filters;
  series: ChartSeries[];
  rows: TableRow[];
  metric: Metric | null;
  scoresInFlight: number;
  scoreSeq: number;
  hovered: number | null;
  pinned: number | null;
}

export async function renderComparisonView(
  root: HTMLElement,
  api: ApiClient,
  requested: Partial<Filters> = {},
): Promise<void> {
  root.textContent = "";
  const status = document.createElement("p");
  status.textContent = "loading…";
  root.append(status);

  let predictions: PredictionRecord[];
  let models: Map<number, ModelRecord>;
  let observed;
  let filters: Filters;
  try {
    predictions = await api.listPredictions({
      disease: requested.disease ?? "dengue",
      uf: requested.uf ?? "",
      start: requested.start,
      end: requested.end,
    });

    const window =
      requested.start || requested.end
        ? { start: requested.start, end: requested.end }
        : defaultWindow(predictions);
    filters = {
      disease: requested.disease ?? "dengue",
      uf: requested.uf ?? dominantUf(predictions),
      start: window.start,
      end: window.end,
    };
    predictions = predictions.filter((p) => intersects(p, filters.start, filters.end));

    const modelIds = [...new Set(predictions.map((p) => p.model))];
    const fetched = await Promise.all(modelIds.map((id) => api.getModel(id)));
    models = new Map(fetched.map((m) => [m.id, m]));
    observed = await api.observedSeries(filters);
  } catch (error) {
    root.textContent = "";
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.setAttribute("role", "alert");
    banner.textContent =
      error instanceof ApiError
        ? `Could not load data from the API (status ${error.status}).`
        : "Could not reach the API.";
    root.append(banner);
    return;
  }

  root.textContent = "";
  root.append(filterBar(filters, (next) => void renderComparisonView(root, api, next)));

  if (predictions.length === 0) {
    const empty = document.createElement("p");
    empty.className = "placeholder";
    empty.textContent = "no predictions match the current filters";
    root.append(empty);
    return;
  }

  const names = new Map([...models.values()].map((m) => [m.id, m.name]));
  const colors = colorAssignments(predictions.map((p) => p.model));
  const state: ViewState = {
    filters,
    series: buildSeries(predictions, names, colors),
    rows: predictions.map((p) => ({
      predictionId: p.id,
      model: models.get(p.model)!,
      color: colors.get(p.model)!,
      score: { state: "idle" } as ScoreCell,
    })),
    metric: null,
    scoresInFlight: 0,
    scoreSeq: 0,
    hovered: null,
    pinned: null,
  };

  const tablePanel = document.createElement("section");
  tablePanel.id = "table-panel";
  const chartRow = document.createElement("div");
  chartRow.className = "chart-row";
  const leftPanel = document.createElement("section");
  leftPanel.id = "comparison-panel";
  const rightPanel = document.createElement("section");
  rightPanel.id = "detail-panel";
  chartRow.append(leftPanel, rightPanel);
  root.append(tablePanel, chartRow);

  const selectedSeries = () => {
    const id = state.pinned ?? state.hovered;
    return id === null ? null : (state.series.find((s) => s.predictionId === id) ?? null);
  };

  const refreshDetail = () => renderDetailPanel(rightPanel, selectedSeries());
  const refreshTable = () =>
    renderModelTable(tablePanel, state.rows, state.metric, state.scoresInFlight > 0, {
      onMetricChange: chooseMetric,
      onHover: (id) => {
        state.hovered = id;
        refreshDetail();
      },
      onLeave: () => {
        state.hovered = null;
        refreshDetail();
      },
      onSelect: (id) => {
        state.pinned = state.pinned === id ? null : id;
        refreshDetail();
      },
    });

  function chooseMetric(metric: Metric): void {
    state.metric = metric;
    state.scoreSeq += 1;
    const seq = state.scoreSeq;
    state.rows = state.rows.map((row) => ({ ...row, score: { state: "loading" } as ScoreCell }));
    state.scoresInFlight = state.rows.length;
    refreshTable();

    for (const row of state.rows) {
      api
        .getScore(row.predictionId, metric)
        .then((report): ScoreCell => {
          const value = report.scores[metric];
          const orientation = report.orientation[metric] ?? "lower";
          return value === undefined
            ? { state: "unavailable" }
            : { state: "value", value, orientation };
        })
        .catch((error): ScoreCell => {
          if (error instanceof ApiError && (error.status === 409 || error.status === 404)) {
            return { state: "unavailable" };
          }
          throw error;
        })
        .then((cell) => {
          if (seq !== state.scoreSeq) return; // superseded by a newer choice
          state.rows = state.rows.map((row2) =>
            row2.predictionId === row.predictionId ? { ...row2, score: cell } : row2,
          );
          state.scoresInFlight -= 1;
          if (state.scoresInFlight === 0) {
            state.rows = sortRows(state.rows);
          }
          refreshTable();
        });
    }
  }

  renderComparisonChart(leftPanel, state.series, observed, {
    onHover: (id) => {
      state.hovered = id;
      refreshDetail();
    },
    onLeave: () => {
      state.hovered = null;
      refreshDetail();
    },
    onSelect: (id) => {
      state.pinned = state.pinned === id ? null : id;
      refreshDetail();
    },
  });
  refreshDetail();
  refreshTable();

  document.addEventListener("keydown", (event) => {
    if (event.key === "Escape") {
      state.pinned = null;
      state.hovered = null;
      refreshDetail();
    }
  });
}

function filterBar(filters: Filters, apply: (next: Partial<Filters>) => void): HTMLElement {
  const bar = document.createElement("form");
  bar.id = "filter-bar";
  bar.addEventListener("submit", (event) => event.preventDefault());

  const disease = document.createElement("select");
  disease.name = "disease";
  for (const name of DISEASES) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    disease.append(option);
  }
  disease.value = filters.disease;

  const uf = document.createElement("input");
  uf.name = "uf";
  uf.placeholder = "UF (e.g. MG)";
  uf.size = 6;
  uf.value = filters.uf;

  const start = document.createElement("input");
  start.name = "start";
  start.type = "date";
  start.value = filters.start ?? "";
  const end = document.createElement("input");
  end.name = "end";
  end.type = "date";
  end.value = filters.end ?? "";

  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Apply";
  button.addEventListener("click", () =>
    apply({
      disease: disease.value,
      uf: uf.value.trim().toUpperCase(),
      start: start.value || undefined,
      end: end.value || undefined,
    }),
  );

  bar.append(disease, uf, start, end, button);
  return bar;
}
