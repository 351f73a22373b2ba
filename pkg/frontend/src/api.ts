/** Thin client over the hub's documented JSON routes.
 *
 * Every request the dashboard ever makes goes through this module, so the
 * public-routes-only invariant is enforceable by capturing fetch calls.
 */

import type {
  Filters,
  InfodengueItem,
  Metric,
  ModelRecord,
  ObservedPoint,
  Page,
  PredictionRecord,
  ScoreReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(`API answered ${status}`);
  }
}

type Params = Record<string, string | number | undefined>;

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async getJson<T>(path: string, params: Params = {}): Promise<T> {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined) query.set(key, String(value));
    }
    const suffix = query.size > 0 ? `?${query.toString()}` : "";
    const response = await fetch(`${this.base}${path}${suffix}`);
    const body = await response.json().catch(() => null);
    if (!response.ok) throw new ApiError(response.status, body);
    return body as T;
  }

  async listPredictions(filters: Filters): Promise<PredictionRecord[]> {
    const items: PredictionRecord[] = [];
    let page = 1;
    for (;;) {
      const envelope = await this.getJson<Page<PredictionRecord>>(
        "/api/registry/predictions",
        {
          disease: filters.disease,
          adm_1: filters.uf || undefined,
          start: filters.start,
          end: filters.end,
          page,
          per_page: 100,
        },
      );
      items.push(...envelope.items);
      if (page >= envelope.pagination.total_pages) return items;
      page += 1;
    }
  }

  async getModel(id: number): Promise<ModelRecord> {
    return this.getJson<ModelRecord>(`/api/registry/models/${id}`);
  }

  async getScore(predictionId: number, metric: Metric): Promise<ScoreReport> {
    return this.getJson<ScoreReport>(
      `/api/registry/predictions/${predictionId}/score`,
      { metric },
    );
  }

  /** Weekly observed case counts, summed across municipalities. */
  async observedSeries(filters: Filters): Promise<ObservedPoint[]> {
    const byDate = new Map<string, number>();
    let page = 1;
    for (;;) {
      const envelope = await this.getJson<Page<InfodengueItem>>(
        "/api/datastore/infodengue",
        {
          disease: filters.disease,
          uf: filters.uf || undefined,
          start: filters.start,
          end: filters.end,
          page,
          per_page: 300,
        },
      );
      for (const item of envelope.items) {
        byDate.set(item.data_iniSE, (byDate.get(item.data_iniSE) ?? 0) + item.casos);
      }
      if (page >= envelope.pagination.total_pages) break;
      page += 1;
    }
    return [...byDate.entries()]
      .map(([date, value]) => ({ date, value }))
      .sort((a, b) => a.date.localeCompare(b.date));
  }
}
