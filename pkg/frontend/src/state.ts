// Panel state and its URL query-string encoding.
//
// Each panel's state lives under a side prefix ("l." / "r.") so an analysis
// session is shareable as a URL. The two panels are fully independent.

import type { Normalization } from "./types.js";

export type ViewName = "graph" | "matrix" | "waffle";

export interface PanelState {
  documentId: string | null;
  view: ViewName;
  exclude: number[]; // sorted category ids
  range: [number, number] | null;
  normalization: Normalization;
  seed: number;
}

export const DEFAULT_PANEL_STATE: PanelState = {
  documentId: null,
  view: "graph",
  exclude: [],
  range: null,
  normalization: "raw-max",
  seed: 0,
};

const VIEWS: ViewName[] = ["graph", "matrix", "waffle"];

export function clonePanelState(state: PanelState): PanelState {
  return {
    ...state,
    exclude: [...state.exclude],
    range: state.range ? [state.range[0], state.range[1]] : null,
  };
}

function encodePanel(prefix: string, state: PanelState, params: URLSearchParams): void {
  if (state.documentId) params.set(`${prefix}.doc`, state.documentId);
  if (state.view !== "graph") params.set(`${prefix}.view`, state.view);
  if (state.exclude.length) params.set(`${prefix}.ex`, state.exclude.join(","));
  if (state.range) params.set(`${prefix}.range`, `${state.range[0]}:${state.range[1]}`);
  if (state.normalization !== "raw-max") params.set(`${prefix}.norm`, state.normalization);
  if (state.seed !== 0) params.set(`${prefix}.seed`, String(state.seed));
}

function decodePanel(prefix: string, params: URLSearchParams): PanelState {
  const state = clonePanelState(DEFAULT_PANEL_STATE);
  const doc = params.get(`${prefix}.doc`);
  if (doc) state.documentId = doc;
  const view = params.get(`${prefix}.view`);
  if (view && (VIEWS as string[]).includes(view)) state.view = view as ViewName;
  const exclude = params.get(`${prefix}.ex`);
  if (exclude) {
    state.exclude = exclude
      .split(",")
      .map((v) => Number.parseInt(v, 10))
      .filter((v) => Number.isInteger(v) && v > 0)
      .sort((a, b) => a - b);
  }
  const range = params.get(`${prefix}.range`);
  if (range) {
    const match = /^(\d+):(\d+)$/.exec(range);
    if (match) {
      const lo = Number.parseInt(match[1], 10);
      const hi = Number.parseInt(match[2], 10);
      if (lo <= hi) state.range = [lo, hi];
    }
  }
  const norm = params.get(`${prefix}.norm`);
  if (norm === "conditional") state.normalization = norm;
  const seed = params.get(`${prefix}.seed`);
  if (seed && /^-?\d+$/.test(seed)) state.seed = Number.parseInt(seed, 10);
  return state;
}

export function encodePanels(left: PanelState, right: PanelState): string {
  const params = new URLSearchParams();
  encodePanel("l", left, params);
  encodePanel("r", right, params);
  return params.toString();
}

export function decodePanels(query: string): { left: PanelState; right: PanelState } {
  const params = new URLSearchParams(query);
  return { left: decodePanel("l", params), right: decodePanel("r", params) };
}

/** Body for POST /api/texts/{id}/layout derived from the panel state. */
export function layoutRequestBody(state: PanelState): Record<string, unknown> {
  const filter: Record<string, unknown> = {};
  if (state.exclude.length) filter.exclude = state.exclude;
  if (state.range) filter.range = state.range;
  const body: Record<string, unknown> = { view: state.view, seed: state.seed };
  if (Object.keys(filter).length) body.filter = filter;
  if (state.view === "matrix") {
    body.layout = { normalization: state.normalization };
  }
  return body;
}

/** Query string for GET /api/texts/{id}/summary derived from the panel state. */
export function summaryQuery(state: PanelState): string {
  const params = new URLSearchParams();
  if (state.exclude.length) params.set("exclude", state.exclude.join(","));
  if (state.range) params.set("range", `${state.range[0]}:${state.range[1]}`);
  return params.toString();
}
