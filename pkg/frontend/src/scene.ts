// Pure scene builders: layout payloads in, SVG markup out.
//
// Renderers take the category registry fetched from the server; no palette
// is hardcoded here. Everything returns strings so the logic is testable
// without a DOM; the panel shell injects the markup and wires events
// through data attributes.

import type {
  Category,
  GraphPayload,
  MatrixPayload,
  Normalization,
  SentencePayload,
  SummaryPayload,
  WafflePayload,
} from "./types.js";

const RING_COLOR = "#999999";
const FALLBACK_COLOR = "#888888";
const HEAT_RGB: [number, number, number] = [42, 85, 153];

export function escapeXml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function colorMap(categories: Category[]): Map<number, string> {
  return new Map(categories.map((c) => [c.id, c.color]));
}

const fmt = (v: number): string => {
  const rounded = Math.round(v * 100) / 100;
  return String(rounded);
};

function svgDocument(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${fmt(width)} ${fmt(height)}" data-width="${fmt(width)}" data-height="${fmt(height)}">`,
    ...body,
    "</svg>",
  ].join("\n");
}

export interface ViewBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Zoom about a point given in current viewBox coordinates. */
export function zoomViewBox(vb: ViewBox, factor: number, cx: number, cy: number): ViewBox {
  const w = vb.w * factor;
  const h = vb.h * factor;
  return {
    x: cx - (cx - vb.x) * factor,
    y: cy - (cy - vb.y) * factor,
    w,
    h,
  };
}

export function panViewBox(vb: ViewBox, dx: number, dy: number): ViewBox {
  return { x: vb.x + dx, y: vb.y + dy, w: vb.w, h: vb.h };
}

// ---------------------------------------------------------------------------
// Graph view
// ---------------------------------------------------------------------------

export function renderGraphScene(payload: GraphPayload, categories: Category[]): string {
  const colors = colorMap(categories);
  const [minX, minY, maxX, maxY] = payload.bounds;
  const pad = 10;
  const width = maxX - minX + 2 * pad;
  const height = maxY - minY + 2 * pad;
  const ox = pad - minX;
  const oy = pad - minY;

  const positions = new Map(payload.nodes.map((n) => [n.sentence_id, n.position]));
  const body: string[] = ['<g class="edges" stroke-width="1" opacity="0.35">'];
  const edgeCategories = Object.keys(payload.edges)
    .map((k) => Number.parseInt(k, 10))
    .sort((a, b) => a - b);
  for (const cid of edgeCategories) {
    const color = colors.get(cid) ?? FALLBACK_COLOR;
    for (const [a, b] of payload.edges[String(cid)]) {
      const pa = positions.get(a);
      const pb = positions.get(b);
      if (!pa || !pb) continue;
      body.push(
        `<line class="edge" data-category="${cid}" x1="${fmt(pa[0] + ox)}" y1="${fmt(
          pa[1] + oy,
        )}" x2="${fmt(pb[0] + ox)}" y2="${fmt(pb[1] + oy)}" stroke="${color}"/>`,
      );
    }
  }
  body.push("</g>", '<g class="nodes">');
  for (const node of payload.nodes) {
    const x = node.position[0] + ox;
    const y = node.position[1] + oy;
    body.push(`<g class="glyph" data-sentence="${escapeXml(node.sentence_id)}">`);
    body.push(
      `<circle class="ring" cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(
        node.ring_radius,
      )}" fill="#ffffff" fill-opacity="0.01" stroke="${RING_COLOR}" stroke-width="1.5"/>`,
    );
    for (const dot of node.tag_dots) {
      body.push(
        `<circle class="dot" data-category="${dot.category_id}" cx="${fmt(
          x + dot.dx,
        )}" cy="${fmt(y + dot.dy)}" r="${fmt(dot.radius)}" fill="${
          colors.get(dot.category_id) ?? FALLBACK_COLOR
        }"/>`,
      );
    }
    body.push("</g>");
  }
  body.push("</g>");
  return svgDocument(width, height, body);
}

// ---------------------------------------------------------------------------
// Matrix view
// ---------------------------------------------------------------------------

export function heatColor(value: number): string {
  const channel = (base: number) => Math.round(255 + (base - 255) * value);
  const [r, g, b] = HEAT_RGB.map(channel);
  const hex = (v: number) => v.toString(16).padStart(2, "0");
  return `#${hex(r)}${hex(g)}${hex(b)}`;
}

/**
 * Recompute display values from raw counts, mirroring the server's
 * normalization semantics. Having this client-side lets the normalization
 * toggle re-render without another request.
 */
export function matrixValues(counts: number[][], mode: Normalization): number[][] {
  const n = counts.length;
  if (mode === "raw-max") {
    let peak = 0;
    for (const row of counts) for (const v of row) peak = Math.max(peak, v);
    return counts.map((row) => row.map((v) => (peak > 0 ? v / peak : 0)));
  }
  return counts.map((row, i) => {
    const diag = counts[i][i];
    return row.map((v) => (diag > 0 ? v / diag : 0));
  });
}

export function renderMatrixScene(
  payload: MatrixPayload,
  categories: Category[],
  normalization?: Normalization,
): string {
  const byId = new Map(categories.map((c) => [c.id, c]));
  const mode = normalization ?? payload.normalization;
  const values =
    mode === payload.normalization ? payload.values : matrixValues(payload.counts, mode);
  const n = payload.order.length;
  const cell = 24;
  const labelSpace = 110;
  const width = labelSpace + n * cell + 10;
  const height = labelSpace + n * cell + 10;

  const body: string[] = ['<g class="cells">'];
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const rowId = payload.order[i];
      const colId = payload.order[j];
      body.push(
        `<rect class="cell" data-row="${rowId}" data-col="${colId}" data-count="${
          payload.counts[i][j]
        }" x="${fmt(labelSpace + j * cell)}" y="${fmt(labelSpace + i * cell)}" width="${cell}" height="${cell}" fill="${heatColor(
          values[i][j],
        )}" stroke="#ffffff" stroke-width="0.5"/>`,
      );
    }
  }
  body.push("</g>", '<g class="labels" font-size="10">');
  for (let i = 0; i < n; i++) {
    const cid = payload.order[i];
    const label = escapeXml(byId.get(cid)?.key ?? String(cid));
    const y = labelSpace + i * cell + cell / 2 + 3;
    const x = labelSpace + i * cell + cell / 2;
    body.push(
      `<text x="${fmt(labelSpace - 6)}" y="${fmt(y)}" text-anchor="end">${label}</text>`,
      `<text x="${fmt(x)}" y="${fmt(labelSpace - 6)}" text-anchor="start" transform="rotate(-60 ${fmt(
        x,
      )} ${fmt(labelSpace - 6)})">${label}</text>`,
    );
  }
  body.push("</g>");
  return svgDocument(width, height, body);
}

// ---------------------------------------------------------------------------
// Waffle view
// ---------------------------------------------------------------------------

export function renderWaffleScene(payload: WafflePayload, categories: Category[]): string {
  const colors = colorMap(categories);
  const pad = 10;
  const width = payload.width + 2 * pad;
  const height = payload.height + 2 * pad;
  const body: string[] = ['<g class="blocks">'];
  for (const row of payload.rows) {
    for (const block of row) {
      body.push(`<g class="block" data-sentence="${escapeXml(block.sentence_id)}">`);
      for (const cell of block.cells) {
        body.push(
          `<rect class="cell" data-category="${cell.category_id}" x="${fmt(
            cell.x + pad,
          )}" y="${fmt(cell.y + pad)}" width="${fmt(cell.size)}" height="${fmt(
            cell.size,
          )}" fill="${colors.get(cell.category_id) ?? FALLBACK_COLOR}"/>`,
        );
      }
      body.push(
        `<rect class="outline" x="${fmt(block.x + pad)}" y="${fmt(block.y + pad)}" width="${fmt(
          block.width,
        )}" height="${fmt(block.height)}" fill="none" stroke="#444444" stroke-width="0.8"/>`,
        "</g>",
      );
    }
  }
  body.push("</g>");
  return svgDocument(width, height, body);
}

// ---------------------------------------------------------------------------
// Summary bars and tooltip
// ---------------------------------------------------------------------------

/** A pair of bar charts: absolute counts and proportions of sentences. */
export function renderSummaryBars(payload: SummaryPayload, categories: Category[]): string {
  const colors = colorMap(categories);
  const barWidth = 16;
  const gap = 4;
  const chartHeight = 70;
  const labelHeight = 14;
  const entries = payload.per_category;
  const chartWidth = entries.length * (barWidth + gap) + gap;
  const maxCount = Math.max(1, ...entries.map((e) => e.count));

  const charts: string[] = [];
  const variants: Array<{ cls: string; value: (e: (typeof entries)[number]) => number; max: number; title: string }> = [
    { cls: "counts", value: (e) => e.count, max: maxCount, title: "sentences per category" },
    { cls: "proportions", value: (e) => e.proportion, max: 1, title: "proportion of sentences" },
  ];
  for (const [index, variant] of variants.entries()) {
    const top = index * (chartHeight + labelHeight + 12) + 12;
    charts.push(`<g class="summary-${variant.cls}">`);
    charts.push(
      `<text x="0" y="${top - 2}" font-size="10" fill="#555555">${variant.title}</text>`,
    );
    entries.forEach((entry, i) => {
      const h = (variant.value(entry) / variant.max) * chartHeight;
      const x = gap + i * (barWidth + gap);
      charts.push(
        `<rect class="bar" data-category="${entry.category_id}" data-count="${
          entry.count
        }" x="${fmt(x)}" y="${fmt(top + chartHeight - h)}" width="${barWidth}" height="${fmt(
          h,
        )}" fill="${colors.get(entry.category_id) ?? FALLBACK_COLOR}"/>`,
      );
    });
    charts.push("</g>");
  }
  const total = 2 * (chartHeight + labelHeight + 12) + 12;
  return svgDocument(chartWidth, total, charts);
}

/**
 * Tooltip for a hovered sentence: its text plus how many other sentences
 * share the exact same tag combination (the endpoint count includes the
 * sentence itself, so the display subtracts one).
 */
export function tooltipText(sentence: SentencePayload): string {
  const others = Math.max(0, sentence.combination_count - 1);
  const suffix =
    others === 1
      ? "1 other sentence shares this tag combination"
      : `${others} other sentences share this tag combination`;
  return `${sentence.text}\n${suffix}`;
}

export function tooltipHtml(sentence: SentencePayload, categories: Category[]): string {
  const byId = new Map(categories.map((c) => [c.id, c]));
  const chips = sentence.tags
    .map((t) => {
      const cat = byId.get(t);
      const color = cat?.color ?? FALLBACK_COLOR;
      const label = escapeXml(cat?.label ?? String(t));
      return `<span class="chip"><i style="background:${color}"></i>${label}</span>`;
    })
    .join(" ");
  const [text, share] = tooltipText(sentence).split("\n");
  return `<p class="tooltip-text">${escapeXml(text)}</p><p class="tooltip-tags">${chips}</p><p class="tooltip-share">${escapeXml(share)}</p>`;
}
