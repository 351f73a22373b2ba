/** The model table: one row per prediction, colored to match its chart
 * line, with the score dropdown that re-ranks rows by the chosen metric. */

import type { Metric, ModelRecord, Orientation } from "./types.js";
import { METRICS } from "./types.js";

export type ScoreCell =
  | { state: "idle" }
  | { state: "loading" }
  | { state: "unavailable" }
  | { state: "value"; value: number; orientation: Orientation };

export interface TableRow {
  predictionId: number;
  model: ModelRecord;
  color: string;
  score: ScoreCell;
}

/** Order rows by score under the metric's orientation; rows without a
 * usable score sort last, in stable prediction order. */
export function sortRows(rows: TableRow[], fallback: TableRow[] = rows): TableRow[] {
  const rank = (row: TableRow) => fallback.findIndex((r) => r.predictionId === row.predictionId);
  return [...rows].sort((a, b) => {
    const aScored = a.score.state === "value";
    const bScored = b.score.state === "value";
    if (aScored && bScored && a.score.state === "value" && b.score.state === "value") {
      const direction = a.score.orientation === "higher" ? -1 : 1;
      if (a.score.value !== b.score.value) {
        return (a.score.value - b.score.value) * direction;
      }
      return rank(a) - rank(b);
    }
    if (aScored !== bScored) return aScored ? -1 : 1;
    return rank(a) - rank(b);
  });
}

function formatScore(cell: ScoreCell): string {
  switch (cell.state) {
    case "idle":
      return "";
    case "loading":
      return "…";
    case "unavailable":
      return "n/a";
    case "value":
      return cell.value.toFixed(4);
  }
}

export interface TableHandlers {
  onMetricChange: (metric: Metric) => void;
  onHover: (predictionId: number) => void;
  onLeave: () => void;
  onSelect: (predictionId: number) => void;
}

export function renderModelTable(
  container: HTMLElement,
  rows: TableRow[],
  metric: Metric | null,
  loading: boolean,
  handlers: TableHandlers,
): void {
  container.textContent = "";
  const table = document.createElement("table");
  table.id = "model-table";
  table.dataset.loading = String(loading);

  const head = document.createElement("tr");
  for (const title of ["Model", "Language", "Resolution", "ADM"]) {
    const cell = document.createElement("th");
    cell.textContent = title;
    head.append(cell);
  }
  const scoreHead = document.createElement("th");
  const select = document.createElement("select");
  select.id = "score-metric";
  const placeholder = document.createElement("option");
  placeholder.value = "";
  placeholder.textContent = "Score";
  select.append(placeholder);
  for (const name of METRICS) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    select.append(option);
  }
  select.value = metric ?? "";
  select.addEventListener("change", () => {
    if (select.value) handlers.onMetricChange(select.value as Metric);
  });
  scoreHead.append(select);
  head.append(scoreHead);
  const thead = document.createElement("thead");
  thead.append(head);
  table.append(thead);

  const body = document.createElement("tbody");
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.className = "model-row";
    tr.dataset.predictionId = String(row.predictionId);
    tr.dataset.modelId = String(row.model.id);
    tr.dataset.color = row.color;

    const nameCell = document.createElement("td");
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = row.color;
    const link = document.createElement("a");
    link.href = `#/models/${row.model.id}`;
    link.textContent = row.model.name;
    link.className = "model-link";
    nameCell.append(swatch, link);
    if (row.model.sprint) {
      const badge = document.createElement("span");
      badge.className = "badge sprint-badge";
      badge.textContent = "sprint";
      nameCell.append(badge);
    }
    tr.append(nameCell);

    for (const text of [
      row.model.implementation_language,
      row.model.time_resolution,
      String(row.model.adm_level),
    ]) {
      const cell = document.createElement("td");
      cell.textContent = text;
      tr.append(cell);
    }

    const scoreCell = document.createElement("td");
    scoreCell.className = "score-cell";
    scoreCell.textContent = formatScore(row.score);
    tr.append(scoreCell);

    tr.addEventListener("mouseover", () => handlers.onHover(row.predictionId));
    tr.addEventListener("mouseout", () => handlers.onLeave());
    tr.addEventListener("click", (event) => {
      if (!(event.target instanceof HTMLAnchorElement)) {
        handlers.onSelect(row.predictionId);
      }
    });
    body.append(tr);
  }
  table.append(body);
  container.append(table);
}
