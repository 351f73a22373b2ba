/** Wire types mirroring the hub's JSON API. */

export interface ModelRecord {
  id: number;
  name: string;
  description: string;
  repository: string;
  implementation_language: string;
  disease: string;
  temporal: boolean;
  spatial: boolean;
  categorical: boolean;
  adm_level: number;
  time_resolution: string;
  sprint: boolean;
  owner: number;
}

export interface PredictionRow {
  date: string;
  pred: number;
  lower: number;
  upper: number;
  adm_0?: string | null;
  adm_1?: string | null;
  adm_2?: number | null;
  adm_3?: number | null;
}

export interface PredictionRecord {
  id: number;
  model: number;
  description: string;
  commit: string;
  predict_date: string;
  adm_level: number;
  prediction: PredictionRow[];
}

export interface Pagination {
  page: number;
  per_page: number;
  total_items: number;
  total_pages: number;
}

export interface Page<T> {
  items: T[];
  pagination: Pagination;
}

export type Metric = "mae" | "mse" | "log_score" | "crps";

export const METRICS: Metric[] = ["mae", "mse", "log_score", "crps"];

export type Orientation = "lower" | "higher";

export interface ScoreReport {
  prediction_id: number;
  scores: Partial<Record<Metric, number>>;
  orientation: Partial<Record<Metric, Orientation>>;
  n_matched: number;
  n_unmatched: number;
  date_range: { start: string; end: string };
}

export interface InfodengueItem {
  data_iniSE: string;
  casos: number;
  municipio_geocodigo: number;
  disease: string;
}

export interface ObservedPoint {
  date: string;
  value: number;
}

export interface Filters {
  disease: string;
  uf: string;
  start?: string;
  end?: string;
}
