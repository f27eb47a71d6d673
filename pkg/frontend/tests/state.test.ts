import { describe, expect, it } from "vitest";

import {
  DEFAULT_PANEL_STATE,
  clonePanelState,
  decodePanels,
  encodePanels,
  layoutRequestBody,
  summaryQuery,
  type PanelState,
} from "../src/state.js";

function state(patch: Partial<PanelState>): PanelState {
  return { ...clonePanelState(DEFAULT_PANEL_STATE), ...patch };
}

describe("panel state codec", () => {
  it("round-trips both panels through the query string", () => {
    const left = state({
      documentId: "goethe",
      view: "matrix",
      exclude: [3, 17],
      normalization: "conditional",
      seed: 9,
    });
    const right = state({ documentId: "dc2", view: "waffle", range: [0, 120] });
    const decoded = decodePanels(encodePanels(left, right));
    expect(decoded.left).toEqual(left);
    expect(decoded.right).toEqual(right);
  });

  it("defaults for an empty query", () => {
    const { left, right } = decodePanels("");
    expect(left).toEqual(DEFAULT_PANEL_STATE);
    expect(right).toEqual(DEFAULT_PANEL_STATE);
  });

  it("the two panels are independent in the encoding", () => {
    const left = state({ documentId: "goethe", exclude: [17] });
    const right = state({ documentId: "dc1" });
    const decoded = decodePanels(encodePanels(left, right));
    expect(decoded.right.exclude).toEqual([]);
    expect(decoded.left.exclude).toEqual([17]);
  });

  it("ignores malformed values", () => {
    const { left } = decodePanels("l.view=pie&l.range=9&l.ex=a,b&l.seed=x");
    expect(left.view).toBe("graph");
    expect(left.range).toBeNull();
    expect(left.exclude).toEqual([]);
    expect(left.seed).toBe(0);
  });
});

describe("request construction", () => {
  it("builds a graph layout body with filters", () => {
    const body = layoutRequestBody(
      state({ view: "graph", exclude: [17, 3], range: [5, 50], seed: 4 }),
    );
    expect(body).toEqual({
      view: "graph",
      seed: 4,
      filter: { exclude: [17, 3], range: [5, 50] },
    });
  });

  it("matrix bodies carry the normalization", () => {
    const body = layoutRequestBody(state({ view: "matrix", normalization: "conditional" }));
    expect(body).toEqual({
      view: "matrix",
      seed: 0,
      layout: { normalization: "conditional" },
    });
  });

  it("summary query mirrors the filter", () => {
    expect(summaryQuery(state({ exclude: [1, 9], range: [0, 10] }))).toBe(
      "exclude=1%2C9&range=0%3A10",
    );
    expect(summaryQuery(state({}))).toBe("");
  });
});
