/**
 * Analysis API client.
 *
 * Each call to refresh() claims a new generation number; by the time its
 * responses arrive, a newer refresh may have superseded it, in which case
 * the stale result is discarded (refresh resolves to null) and never
 * rendered.  All five analysis POSTs of one refresh share the generation,
 * so panels update atomically.
 */

import {
  FilterState,
  bttreeRequestBody,
  cdRequestBody,
  errorsRequestBody,
  paretoRequestBody,
  scaledRequestBody,
} from "./state.js";

export interface PanelResult {
  data: unknown | null;
  error: string | null;
}

export interface ViewModel {
  generation: number;
  cd: PanelResult;
  scaled: PanelResult;
  pareto: PanelResult;
  tree: PanelResult;
  errors: PanelResult;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class AnalysisClient {
  private generation = 0;

  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  async getFrameworks(): Promise<string[]> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/frameworks`);
    return (await resp.json()) as string[];
  }

  async getTasks(): Promise<Array<Record<string, unknown>>> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/tasks`);
    return (await resp.json()) as Array<Record<string, unknown>>;
  }

  async getMetafeatureNames(): Promise<string[]> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/metafeatures`);
    const doc = (await resp.json()) as Array<{ metafeatures: Record<string, number> }>;
    const names = new Set<string>();
    for (const entry of doc) {
      for (const key of Object.keys(entry.metafeatures)) names.add(key);
    }
    return [...names].sort();
  }

  private async post(path: string, body: unknown): Promise<PanelResult> {
    try {
      const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
      const doc = await resp.json();
      if (!resp.ok) {
        return { data: null, error: String((doc as { error?: string }).error ?? resp.status) };
      }
      return { data: doc, error: null };
    } catch (exc) {
      return { data: null, error: String(exc) };
    }
  }

  /** Issue all analysis POSTs for the state; null when superseded. */
  async refresh(state: FilterState): Promise<ViewModel | null> {
    const generation = ++this.generation;
    const [cd, scaled, pareto, tree, errors] = await Promise.all([
      this.post("/api/analysis/cd", cdRequestBody(state)),
      this.post("/api/analysis/scaled", scaledRequestBody(state)),
      this.post("/api/analysis/pareto", paretoRequestBody(state)),
      this.post("/api/analysis/bttree", bttreeRequestBody(state)),
      this.post("/api/analysis/errors", errorsRequestBody(state)),
    ]);
    if (generation !== this.generation) {
      return null; // a newer refresh superseded this one
    }
    return { generation, cd, scaled, pareto, tree, errors };
  }
}
