// Panel controller: one independent column of the studio.
//
// PanelCore owns state, request lifecycles, and caching; it has no DOM
// dependency so its behavior (independence, cancellation, the local
// normalization toggle) is unit-testable. PanelView is the thin DOM shell
// around it.

import type {
  Category,
  LayoutPayload,
  MatrixPayload,
  SentencePayload,
  SummaryPayload,
  TextInfo,
} from "./types.js";
import type { PanelState, ViewName } from "./state.js";
import { clonePanelState } from "./state.js";
import {
  panViewBox,
  renderGraphScene,
  renderMatrixScene,
  renderSummaryBars,
  renderWaffleScene,
  tooltipHtml,
  zoomViewBox,
  type ViewBox,
} from "./scene.js";

export interface PanelApi {
  layout(documentId: string, state: PanelState, signal?: AbortSignal): Promise<LayoutPayload>;
  summary(documentId: string, state: PanelState, signal?: AbortSignal): Promise<SummaryPayload>;
  sentence(documentId: string, sentenceId: string, signal?: AbortSignal): Promise<SentencePayload>;
}

export interface PanelRenderer {
  renderLayout(layout: LayoutPayload, state: PanelState): void;
  renderSummary(summary: SummaryPayload, state: PanelState): void;
  renderError(message: string): void;
  setLoading(loading: boolean): void;
}

function isAbort(error: unknown): boolean {
  return error instanceof DOMException && error.name === "AbortError";
}

export class PanelCore {
  state: PanelState;
  private inflight: AbortController | null = null;
  private lastLayout: LayoutPayload | null = null;
  private readonly sentences = new Map<string, SentencePayload>();

  constructor(
    private readonly api: PanelApi,
    private readonly renderer: PanelRenderer,
    initial: PanelState,
  ) {
    this.state = clonePanelState(initial);
  }

  /** Apply a state patch and refresh; in-flight requests are cancelled. */
  async update(patch: Partial<PanelState>): Promise<void> {
    const next = { ...clonePanelState(this.state), ...patch };

    // A matrix normalization flip can re-render from the cached payload:
    // the payload carries raw counts, so no server round-trip is needed.
    const onlyNormalization =
      this.lastLayout?.view === "matrix" &&
      next.view === "matrix" &&
      patch.normalization !== undefined &&
      this.sameRequest({ ...next, normalization: this.state.normalization });
    this.state = next;
    if (onlyNormalization && this.lastLayout) {
      this.renderer.renderLayout(this.lastLayout, this.state);
      return;
    }
    await this.refresh();
  }

  private sameRequest(other: PanelState): boolean {
    const s = this.state;
    return (
      s.documentId === other.documentId &&
      s.view === other.view &&
      s.seed === other.seed &&
      s.exclude.join(",") === other.exclude.join(",") &&
      String(s.range) === String(other.range)
    );
  }

  async refresh(): Promise<void> {
    if (!this.state.documentId) return;
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.renderer.setLoading(true);
    try {
      const [layout, summary] = await Promise.all([
        this.api.layout(this.state.documentId, this.state, controller.signal),
        this.api.summary(this.state.documentId, this.state, controller.signal),
      ]);
      if (controller.signal.aborted) return;
      this.lastLayout = layout;
      this.renderer.renderLayout(layout, this.state);
      this.renderer.renderSummary(summary, this.state);
    } catch (error) {
      if (isAbort(error) || controller.signal.aborted) return;
      this.renderer.renderError(error instanceof Error ? error.message : String(error));
    } finally {
      if (this.inflight === controller) {
        this.inflight = null;
        this.renderer.setLoading(false);
      }
    }
  }

  /** Sentence details for tooltips, cached per document. */
  async hover(sentenceId: string): Promise<SentencePayload | null> {
    if (!this.state.documentId) return null;
    const key = `${this.state.documentId}:${sentenceId}`;
    const cached = this.sentences.get(key);
    if (cached) return cached;
    try {
      const payload = await this.api.sentence(this.state.documentId, sentenceId);
      this.sentences.set(key, payload);
      return payload;
    } catch {
      return null;
    }
  }
}

// ---------------------------------------------------------------------------
// DOM shell
// ---------------------------------------------------------------------------

const VIEW_LABELS: Array<[ViewName, string]> = [
  ["graph", "Graph"],
  ["matrix", "Matrix"],
  ["waffle", "Waffle"],
];

export class PanelView implements PanelRenderer {
  readonly core: PanelCore;
  private readonly root: HTMLElement;
  private readonly vis: HTMLElement;
  private readonly summaryEl: HTMLElement;
  private readonly tooltip: HTMLElement;
  private readonly status: HTMLElement;
  private viewBox: ViewBox | null = null;
  private categories: Category[];

  constructor(
    root: HTMLElement,
    api: PanelApi,
    categories: Category[],
    texts: TextInfo[],
    initial: PanelState,
    private readonly onStateChange: (state: PanelState) => void,
  ) {
    this.root = root;
    this.categories = categories;
    this.core = new PanelCore(api, this, initial);

    root.innerHTML = `
      <div class="panel-controls">
        <select class="doc-select" title="document"></select>
        <div class="view-buttons"></div>
        <input class="seed-input" type="number" title="layout seed" value="${initial.seed}">
      </div>
      <div class="filter-chips" title="click a category to exclude it"></div>
      <div class="matrix-controls hidden">
        <label>normalize
          <select class="norm-select">
            <option value="raw-max">raw max</option>
            <option value="conditional">conditional</option>
          </select>
        </label>
      </div>
      <div class="panel-status"></div>
      <div class="panel-vis"></div>
      <div class="panel-summary"></div>
      <div class="panel-tooltip hidden"></div>
    `;
    this.vis = root.querySelector(".panel-vis") as HTMLElement;
    this.summaryEl = root.querySelector(".panel-summary") as HTMLElement;
    this.tooltip = root.querySelector(".panel-tooltip") as HTMLElement;
    this.status = root.querySelector(".panel-status") as HTMLElement;

    this.buildControls(texts, initial);
    this.wireHover();
    this.wirePanZoom();
  }

  private buildControls(texts: TextInfo[], initial: PanelState): void {
    const select = this.root.querySelector(".doc-select") as HTMLSelectElement;
    for (const text of texts) {
      const option = document.createElement("option");
      option.value = text.id;
      option.textContent = `${text.title} (${text.sentence_count})`;
      select.appendChild(option);
    }
    if (initial.documentId) select.value = initial.documentId;
    select.addEventListener("change", () => this.apply({ documentId: select.value }));

    const buttons = this.root.querySelector(".view-buttons") as HTMLElement;
    for (const [view, label] of VIEW_LABELS) {
      const button = document.createElement("button");
      button.textContent = label;
      button.dataset.view = view;
      button.classList.toggle("active", view === initial.view);
      button.addEventListener("click", () => {
        buttons.querySelectorAll("button").forEach((b) => b.classList.remove("active"));
        button.classList.add("active");
        this.apply({ view });
      });
      buttons.appendChild(button);
    }

    const chips = this.root.querySelector(".filter-chips") as HTMLElement;
    for (const category of this.categories) {
      const chip = document.createElement("button");
      chip.className = "chip";
      chip.dataset.categoryId = String(category.id);
      chip.innerHTML = `<i style="background:${category.color}"></i>${category.key}`;
      chip.classList.toggle("excluded", initial.exclude.includes(category.id));
      chip.addEventListener("click", () => {
        chip.classList.toggle("excluded");
        const exclude = [...chips.querySelectorAll(".chip.excluded")]
          .map((c) => Number.parseInt((c as HTMLElement).dataset.categoryId ?? "0", 10))
          .sort((a, b) => a - b);
        this.apply({ exclude });
      });
      chips.appendChild(chip);
    }

    const norm = this.root.querySelector(".norm-select") as HTMLSelectElement;
    norm.value = initial.normalization;
    norm.addEventListener("change", () =>
      this.apply({ normalization: norm.value as PanelState["normalization"] }),
    );

    const seed = this.root.querySelector(".seed-input") as HTMLInputElement;
    seed.addEventListener("change", () => {
      const value = Number.parseInt(seed.value, 10);
      if (Number.isInteger(value)) this.apply({ seed: value });
    });
  }

  private apply(patch: Partial<PanelState>): void {
    void this.core.update(patch).then(() => this.onStateChange(this.core.state));
  }

  start(): void {
    void this.core.refresh().then(() => this.onStateChange(this.core.state));
  }

  // -- rendering -----------------------------------------------------------

  renderLayout(layout: LayoutPayload, state: PanelState): void {
    this.status.textContent = "";
    const matrixControls = this.root.querySelector(".matrix-controls") as HTMLElement;
    matrixControls.classList.toggle("hidden", layout.view !== "matrix");
    let markup: string;
    if (layout.view === "graph") {
      markup = renderGraphScene(layout, this.categories);
    } else if (layout.view === "waffle") {
      markup = renderWaffleScene(layout, this.categories);
    } else {
      markup = renderMatrixScene(layout as MatrixPayload, this.categories, state.normalization);
    }
    this.vis.innerHTML = markup;
    this.viewBox = null;
    this.applyViewBox();
  }

  renderSummary(summary: SummaryPayload, _state: PanelState): void {
    this.summaryEl.innerHTML = renderSummaryBars(summary, this.categories);
  }

  renderError(message: string): void {
    this.status.textContent = `error: ${message}`;
    this.status.classList.add("error");
  }

  setLoading(loading: boolean): void {
    this.root.classList.toggle("loading", loading);
    if (loading) {
      this.status.classList.remove("error");
      this.status.textContent = "computing layout…";
    } else if (!this.status.classList.contains("error")) {
      this.status.textContent = "";
    }
  }

  // -- interaction ---------------------------------------------------------

  private wireHover(): void {
    this.vis.addEventListener("mousemove", (event) => {
      const target = event.target as Element | null;
      const holder = target?.closest("[data-sentence]") as HTMLElement | null;
      if (holder?.dataset.sentence) {
        void this.showSentenceTooltip(holder.dataset.sentence, event);
        return;
      }
      const cell = target?.closest(".cell[data-row]") as HTMLElement | null;
      if (cell) {
        this.showMatrixTooltip(cell, event);
        return;
      }
      this.hideTooltip();
    });
    this.vis.addEventListener("mouseleave", () => this.hideTooltip());
  }

  private async showSentenceTooltip(sentenceId: string, event: MouseEvent): Promise<void> {
    const payload = await this.core.hover(sentenceId);
    if (!payload) return;
    this.tooltip.innerHTML = tooltipHtml(payload, this.categories);
    this.placeTooltip(event);
  }

  private showMatrixTooltip(cell: HTMLElement, event: MouseEvent): void {
    const byId = new Map(this.categories.map((c) => [String(c.id), c.key]));
    const row = byId.get(cell.dataset.row ?? "") ?? cell.dataset.row;
    const col = byId.get(cell.dataset.col ?? "") ?? cell.dataset.col;
    const count = cell.dataset.count;
    this.tooltip.textContent = `${row} × ${col}: ${count} sentences`;
    this.placeTooltip(event);
  }

  private placeTooltip(event: MouseEvent): void {
    const bounds = this.root.getBoundingClientRect();
    this.tooltip.classList.remove("hidden");
    this.tooltip.style.left = `${event.clientX - bounds.left + 14}px`;
    this.tooltip.style.top = `${event.clientY - bounds.top + 14}px`;
  }

  private hideTooltip(): void {
    this.tooltip.classList.add("hidden");
  }

  private svgElement(): SVGSVGElement | null {
    return this.vis.querySelector("svg");
  }

  private applyViewBox(): void {
    const svg = this.svgElement();
    if (!svg) return;
    if (!this.viewBox) {
      const width = Number.parseFloat(svg.dataset.width ?? "0");
      const height = Number.parseFloat(svg.dataset.height ?? "0");
      this.viewBox = { x: 0, y: 0, w: width, h: height };
    }
    const { x, y, w, h } = this.viewBox;
    svg.setAttribute("viewBox", `${x} ${y} ${w} ${h}`);
  }

  private wirePanZoom(): void {
    this.vis.addEventListener(
      "wheel",
      (event) => {
        const svg = this.svgElement();
        if (!svg || !this.viewBox) return;
        event.preventDefault();
        const rect = svg.getBoundingClientRect();
        const cx = this.viewBox.x + ((event.clientX - rect.left) / rect.width) * this.viewBox.w;
        const cy = this.viewBox.y + ((event.clientY - rect.top) / rect.height) * this.viewBox.h;
        const factor = event.deltaY > 0 ? 1.15 : 1 / 1.15;
        this.viewBox = zoomViewBox(this.viewBox, factor, cx, cy);
        this.applyViewBox();
      },
      { passive: false },
    );

    let dragging: { startX: number; startY: number; box: ViewBox } | null = null;
    this.vis.addEventListener("mousedown", (event) => {
      if (!this.viewBox) return;
      dragging = { startX: event.clientX, startY: event.clientY, box: { ...this.viewBox } };
    });
    window.addEventListener("mousemove", (event) => {
      const svg = this.svgElement();
      if (!dragging || !svg) return;
      const rect = svg.getBoundingClientRect();
      const dx = ((event.clientX - dragging.startX) / rect.width) * dragging.box.w;
      const dy = ((event.clientY - dragging.startY) / rect.height) * dragging.box.h;
      this.viewBox = panViewBox(dragging.box, -dx, -dy);
      this.applyViewBox();
    });
    window.addEventListener("mouseup", () => {
      dragging = null;
    });
  }
}
