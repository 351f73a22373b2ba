/** Hand-rolled SVG charts: median lines over observed points on the left,
 * the selected model's interval band on the right. */

import type { ObservedPoint, PredictionRecord } from "./types.js";

export interface BandPoint {
  date: string;
  lower: number;
  upper: number;
}

export interface ChartSeries {
  predictionId: number;
  modelId: number;
  modelName: string;
  color: string;
  median: ObservedPoint[];
  band: BandPoint[];
}

const WIDTH = 640;
const HEIGHT = 340;
const MARGIN = { top: 16, right: 16, bottom: 28, left: 48 };
const SVG_NS = "http://www.w3.org/2000/svg";

export function buildSeries(
  predictions: PredictionRecord[],
  names: Map<number, string>,
  colors: Map<number, string>,
): ChartSeries[] {
  return predictions.map((prediction) => {
    const rows = [...prediction.prediction].sort((a, b) =>
      a.date.localeCompare(b.date),
    );
    for (const row of rows) {
      if (row.lower > row.pred || row.pred > row.upper) {
        throw new Error(
          `prediction ${prediction.id}: band does not enclose the median at ${row.date}`,
        );
      }
    }
    return {
      predictionId: prediction.id,
      modelId: prediction.model,
      modelName: names.get(prediction.model) ?? `model ${prediction.model}`,
      color: colors.get(prediction.model) ?? "#000000",
      median: rows.map((row) => ({ date: row.date, value: row.pred })),
      band: rows.map((row) => ({ date: row.date, lower: row.lower, upper: row.upper })),
    };
  });
}

interface Scales {
  x: (date: string) => number;
  y: (value: number) => number;
  xDomain: [string, string];
  yMax: number;
}

function makeScales(series: ChartSeries[], observed: ObservedPoint[]): Scales {
  const dates: string[] = [];
  let yMax = 1;
  for (const s of series) {
    for (const p of s.median) dates.push(p.date);
    for (const b of s.band) yMax = Math.max(yMax, b.upper);
  }
  for (const o of observed) {
    dates.push(o.date);
    yMax = Math.max(yMax, o.value);
  }
  dates.sort();
  const first = dates[0] ?? "2000-01-01";
  const last = dates[dates.length - 1] ?? "2000-12-31";
  const t0 = Date.parse(first);
  const span = Math.max(Date.parse(last) - t0, 1);
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
  return {
    x: (date) => MARGIN.left + ((Date.parse(date) - t0) / span) * innerW,
    y: (value) => MARGIN.top + innerH - (value / yMax) * innerH,
    xDomain: [first, last],
    yMax,
  };
}

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attributes: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attributes)) {
    node.setAttribute(key, value);
  }
  return node;
}

function axes(svg: SVGSVGElement, scales: Scales): void {
  const bottom = HEIGHT - MARGIN.bottom;
  svg.append(
    svgElement("line", {
      x1: String(MARGIN.left), y1: String(bottom),
      x2: String(WIDTH - MARGIN.right), y2: String(bottom),
      stroke: "#888", "stroke-width": "1",
    }),
    svgElement("line", {
      x1: String(MARGIN.left), y1: String(MARGIN.top),
      x2: String(MARGIN.left), y2: String(bottom),
      stroke: "#888", "stroke-width": "1",
    }),
  );
  const labels: Array<[string, string, string, string]> = [
    [scales.xDomain[0], String(MARGIN.left), String(HEIGHT - 8), "start"],
    [scales.xDomain[1], String(WIDTH - MARGIN.right), String(HEIGHT - 8), "end"],
    ["0", String(MARGIN.left - 6), String(bottom + 4), "end"],
    [String(Math.round(scales.yMax)), String(MARGIN.left - 6), String(MARGIN.top + 8), "end"],
  ];
  for (const [text, x, y, anchor] of labels) {
    const label = svgElement("text", {
      x, y, "text-anchor": anchor, "font-size": "10", fill: "#555",
    });
    label.textContent = text;
    svg.append(label);
  }
}

function medianPath(series: ChartSeries, scales: Scales): string {
  return series.median
    .map((p, i) => `${i === 0 ? "M" : "L"}${scales.x(p.date).toFixed(1)},${scales.y(p.value).toFixed(1)}`)
    .join(" ");
}

export interface ChartHandlers {
  onHover: (predictionId: number) => void;
  onLeave: () => void;
  onSelect: (predictionId: number) => void;
}

/** Left panel: every prediction's solid median line over black observed points. */
export function renderComparisonChart(
  container: HTMLElement,
  series: ChartSeries[],
  observed: ObservedPoint[],
  handlers: ChartHandlers,
): void {
  container.textContent = "";
  const scales = makeScales(series, observed);
  const svg = svgElement("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: String(WIDTH),
    height: String(HEIGHT),
    class: "comparison-chart",
    role: "img",
  });
  axes(svg, scales);

  for (const point of observed) {
    svg.append(
      svgElement("circle", {
        cx: scales.x(point.date).toFixed(1),
        cy: scales.y(point.value).toFixed(1),
        r: "3",
        fill: "#000",
        class: "observed-point",
        "data-date": point.date,
      }),
    );
  }

  for (const s of series) {
    const path = svgElement("path", {
      d: medianPath(s, scales),
      fill: "none",
      stroke: s.color,
      "stroke-width": "2",
      class: "median-line",
      "data-prediction-id": String(s.predictionId),
      "data-model-id": String(s.modelId),
    });
    path.addEventListener("mouseover", () => handlers.onHover(s.predictionId));
    path.addEventListener("mouseout", () => handlers.onLeave());
    path.addEventListener("click", () => handlers.onSelect(s.predictionId));
    svg.append(path);
  }
  container.append(svg);
}

/** Right panel: the selected model's median plus its shaded interval band. */
export function renderDetailPanel(container: HTMLElement, series: ChartSeries | null): void {
  container.textContent = "";
  if (series === null) {
    const hint = document.createElement("p");
    hint.className = "detail-hint";
    hint.textContent = "Hover a line (click to pin) to see its prediction interval.";
    container.append(hint);
    return;
  }
  const scales = makeScales([series], []);
  const svg = svgElement("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: String(WIDTH),
    height: String(HEIGHT),
    class: "detail-chart",
  });
  axes(svg, scales);

  const upper = series.band.map(
    (b) => `${scales.x(b.date).toFixed(1)},${scales.y(b.upper).toFixed(1)}`,
  );
  const lower = [...series.band]
    .reverse()
    .map((b) => `${scales.x(b.date).toFixed(1)},${scales.y(b.lower).toFixed(1)}`);
  svg.append(
    svgElement("polygon", {
      points: [...upper, ...lower].join(" "),
      fill: series.color,
      "fill-opacity": "0.25",
      stroke: "none",
      class: "interval-band",
      "data-prediction-id": String(series.predictionId),
      "data-model-id": String(series.modelId),
    }),
  );
  svg.append(
    svgElement("path", {
      d: medianPath(series, scales),
      fill: "none",
      stroke: series.color,
      "stroke-width": "2",
      class: "median-line",
      "data-prediction-id": String(series.predictionId),
    }),
  );

  const caption = document.createElement("p");
  caption.className = "detail-caption";
  caption.textContent = `${series.modelName} — 95% prediction interval`;
  container.append(svg, caption);
}
