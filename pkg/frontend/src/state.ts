/**
 * Filter state shared by every panel, its URL permalink encoding, and
 * the one-to-one mapping onto the analysis POST bodies.
 *
 * The state round-trips: decodePermalink(encodePermalink(s)) equals s,
 * the default state encodes to an empty query string, and unknown query
 * keys are ignored.
 */

export interface FilterState {
  frameworks: string[]; // empty = all
  tasks: string[]; // empty = all
  constraint: string | null;
  metric: string | null;
  alpha: number;
  metafeatures: string[];
  maxDepth: number;
}

export const DEFAULT_METAFEATURES = ["n_instances", "n_features"];

export function defaultState(): FilterState {
  return {
    frameworks: [],
    tasks: [],
    constraint: null,
    metric: null,
    alpha: 0.05,
    metafeatures: [...DEFAULT_METAFEATURES],
    maxDepth: 3,
  };
}

function sameList(a: string[], b: string[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

export function encodePermalink(state: FilterState): string {
  const base = defaultState();
  const params = new URLSearchParams();
  if (!sameList(state.frameworks, base.frameworks)) {
    params.set("fw", state.frameworks.join(","));
  }
  if (!sameList(state.tasks, base.tasks)) {
    params.set("tasks", state.tasks.join(","));
  }
  if (state.constraint !== base.constraint && state.constraint !== null) {
    params.set("constraint", state.constraint);
  }
  if (state.metric !== base.metric && state.metric !== null) {
    params.set("metric", state.metric);
  }
  if (state.alpha !== base.alpha) {
    params.set("alpha", String(state.alpha));
  }
  if (!sameList(state.metafeatures, base.metafeatures)) {
    params.set("mf", state.metafeatures.join(","));
  }
  if (state.maxDepth !== base.maxDepth) {
    params.set("depth", String(state.maxDepth));
  }
  const encoded = params.toString();
  return encoded ? `?${encoded}` : "";
}

function splitList(value: string | null): string[] | null {
  if (value === null) return null;
  return value === "" ? [] : value.split(",");
}

export function decodePermalink(query: string): FilterState {
  const state = defaultState();
  const params = new URLSearchParams(query.startsWith("?") ? query.slice(1) : query);
  const fw = splitList(params.get("fw"));
  if (fw !== null) state.frameworks = fw;
  const tasks = splitList(params.get("tasks"));
  if (tasks !== null) state.tasks = tasks;
  if (params.get("constraint") !== null) state.constraint = params.get("constraint");
  if (params.get("metric") !== null) state.metric = params.get("metric");
  const alpha = params.get("alpha");
  if (alpha !== null && !Number.isNaN(Number(alpha))) state.alpha = Number(alpha);
  const mf = splitList(params.get("mf"));
  if (mf !== null) state.metafeatures = mf;
  const depth = params.get("depth");
  if (depth !== null && !Number.isNaN(Number(depth))) state.maxDepth = Number(depth);
  return state;
}

/** Common filter portion shared by all analysis bodies. */
function filterBody(state: FilterState): Record<string, unknown> {
  const body: Record<string, unknown> = {};
  if (state.frameworks.length > 0) body.frameworks = state.frameworks;
  if (state.tasks.length > 0) body.tasks = state.tasks;
  if (state.constraint !== null) body.constraint_id = state.constraint;
  if (state.metric !== null) body.metric = state.metric;
  return body;
}

export function cdRequestBody(state: FilterState): Record<string, unknown> {
  return { ...filterBody(state), alpha: state.alpha };
}

export function scaledRequestBody(state: FilterState): Record<string, unknown> {
  return filterBody(state);
}

export function paretoRequestBody(state: FilterState): Record<string, unknown> {
  return filterBody(state);
}

export function errorsRequestBody(state: FilterState): Record<string, unknown> {
  return filterBody(state);
}

export function bttreeRequestBody(state: FilterState): Record<string, unknown> {
  return {
    ...filterBody(state),
    metafeatures: state.metafeatures,
    max_depth: state.maxDepth,
    alpha: state.alpha,
  };
}
