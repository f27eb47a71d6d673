"""Standalone SVG renderers for the three views.

Dependency-free string emission; colors come from the category registry.
Rendered output is deterministic for identical layouts, so exported files
diff cleanly.
"""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

from .corpus import Category
from .layout import GraphLayout, MatrixLayout, WaffleLayout

__all__ = ["render_graph_svg", "render_matrix_svg", "render_waffle_svg"]

RING_COLOR = "#999999"
MATRIX_BASE_COLOR = (42, 85, 153)  # heat hue; cells interpolate white -> this


def _color_map(categories: tuple[Category, ...]) -> dict[int, str]:
    return {c.id: c.color for c in categories}


def _fmt(value: float) -> str:
    return f"{value:.2f}".rstrip("0").rstrip(".")


def _svg_document(width: float, height: float, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_graph_svg(
    layout: GraphLayout, categories: tuple[Category, ...]
) -> str:
    """Rings with colored tag dots, category edges drawn underneath."""
    colors = _color_map(categories)
    min_x, min_y, max_x, max_y = layout.bounds
    pad = 10.0
    width = (max_x - min_x) + 2 * pad
    height = (max_y - min_y) + 2 * pad
    ox, oy = pad - min_x, pad - min_y

    node_pos = {n.sentence_id: n.position for n in layout.nodes}
    body = ['<g class="edges" stroke-width="1" opacity="0.35">']
    for cid in sorted(layout.edges):
        color = colors.get(cid, "#888888")
        for a, b in layout.edges[cid]:
            xa, ya = node_pos[a]
            xb, yb = node_pos[b]
            body.append(
                f'<line class="edge" data-category="{cid}" '
                f'x1="{_fmt(xa + ox)}" y1="{_fmt(ya + oy)}" '
                f'x2="{_fmt(xb + ox)}" y2="{_fmt(yb + oy)}" stroke="{color}"/>'
            )
    body.append("</g>")

    body.append('<g class="nodes">')
    for node in layout.nodes:
        x, y = node.position[0] + ox, node.position[1] + oy
        body.append(f'<g class="glyph" data-sentence={quoteattr(node.sentence_id)}>')
        body.append(
            f'<circle class="ring" cx="{_fmt(x)}" cy="{_fmt(y)}" '
            f'r="{_fmt(node.ring_radius)}" fill="none" '
            f'stroke="{RING_COLOR}" stroke-width="1.5"/>'
        )
        for cid, dx, dy, dr in node.tag_dots:
            body.append(
                f'<circle class="dot" data-category="{cid}" '
                f'cx="{_fmt(x + dx)}" cy="{_fmt(y + dy)}" r="{_fmt(dr)}" '
                f'fill="{colors.get(cid, "#888888")}"/>'
            )
        body.append("</g>")
    body.append("</g>")
    return _svg_document(width, height, body)


def _heat_color(value: float) -> str:
    r0, g0, b0 = MATRIX_BASE_COLOR
    r = round(255 + (r0 - 255) * value)
    g = round(255 + (g0 - 255) * value)
    b = round(255 + (b0 - 255) * value)
    return f"#{r:02x}{g:02x}{b:02x}"


def render_matrix_svg(
    layout: MatrixLayout,
    categories: tuple[Category, ...],
    cell: float = 24.0,
    label_space: float = 110.0,
) -> str:
    """Heatmap grid with category labels on both axes."""
    by_id = {c.id: c for c in categories}
    n = len(layout.order)
    width = label_space + n * cell + 10.0
    height = label_space + n * cell + 10.0

    body = ['<g class="cells">']
    for i, row_id in enumerate(layout.order):
        for j, col_id in enumerate(layout.order):
            v = float(layout.values[i][j])
            count = int(layout.counts[i][j])
            body.append(
                f'<rect class="cell" data-row="{row_id}" data-col="{col_id}" '
                f'data-count="{count}" '
                f'x="{_fmt(label_space + j * cell)}" y="{_fmt(label_space + i * cell)}" '
                f'width="{_fmt(cell)}" height="{_fmt(cell)}" '
                f'fill="{_heat_color(v)}" stroke="#ffffff" stroke-width="0.5"/>'
            )
    body.append("</g>")

    body.append('<g class="labels" font-family="sans-serif" font-size="10">')
    for i, cid in enumerate(layout.order):
        label = escape(by_id[cid].key if cid in by_id else str(cid))
        y = label_space + i * cell + cell / 2 + 3
        body.append(
            f'<text x="{_fmt(label_space - 6)}" y="{_fmt(y)}" text-anchor="end">{label}</text>'
        )
        x = label_space + i * cell + cell / 2
        body.append(
            f'<text x="{_fmt(x)}" y="{_fmt(label_space - 6)}" text-anchor="start" '
            f'transform="rotate(-60 {_fmt(x)} {_fmt(label_space - 6)})">{label}</text>'
        )
    body.append("</g>")
    return _svg_document(width, height, body)


def render_waffle_svg(
    layout: WaffleLayout, categories: tuple[Category, ...]
) -> str:
    """Sentence blocks as outlined boxes of equal-size colored tag cells."""
    colors = _color_map(categories)
    pad = 10.0
    width = layout.width + 2 * pad
    height = layout.height + 2 * pad

    body = ['<g class="blocks">']
    for row in layout.rows:
        for block in row.blocks:
            body.append(f'<g class="block" data-sentence={quoteattr(block.sentence_id)}>')
            for cid, x, y, size in block.cells:
                body.append(
                    f'<rect class="cell" data-category="{cid}" '
                    f'x="{_fmt(x + pad)}" y="{_fmt(y + pad)}" '
                    f'width="{_fmt(size)}" height="{_fmt(size)}" '
                    f'fill="{colors.get(cid, "#888888")}"/>'
                )
            body.append(
                f'<rect class="outline" x="{_fmt(block.x + pad)}" y="{_fmt(block.y + pad)}" '
                f'width="{_fmt(block.width)}" height="{_fmt(block.height)}" '
                f'fill="none" stroke="#444444" stroke-width="0.8"/>'
            )
            body.append("</g>")
    body.append("</g>")
    return _svg_document(width, height, body)
