"""View geometry: de-overlapped glyph layouts, waffle grids, matrix heatmaps.

The graph view draws one ring glyph per sentence at its embedding anchor,
nudged apart by a force simulation so no two rings overlap, with each
category's member glyphs connected by edges. The waffle view packs equal
sized tag cells into per-sentence blocks in reading order. The matrix view
normalizes a co-occurrence matrix into [0, 1] heat values.

All functions are pure and deterministic; the de-overlap simulation takes an
explicit seed that only influences how exactly-coincident glyphs are split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytics import CoOccurrenceMatrix
from .corpus import Document, Sentence

__all__ = [
    "DeoverlapParams",
    "GlyphNode",
    "GraphLayout",
    "WaffleBlock",
    "WaffleRow",
    "WaffleLayout",
    "WaffleConfig",
    "MatrixLayout",
    "LayoutConfigError",
    "deoverlap",
    "category_edges",
    "glyph_spec",
    "graph_layout",
    "waffle_layout",
    "matrix_layout",
]


class LayoutConfigError(Exception):
    """Raised for layout parameters that cannot produce a valid geometry."""


# ---------------------------------------------------------------------------
# De-overlap simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeoverlapParams:
    """Simulation knobs.

    Each iteration applies a spring pulling every node back toward its
    anchor (coefficient ``anchor_strength``, cooled geometrically over the
    run as in any force simulation) and then resolves pairwise disk
    collisions, pushing overlapping pairs apart symmetrically until their
    separation is at least the sum of radii plus ``padding``. The run stops
    when the largest per-iteration displacement falls below
    ``convergence_epsilon`` (default: 1e-3 of the mean radius) or after
    ``max_iterations``.
    """

    anchor_strength: float = 0.1
    padding: float = 0.0
    max_iterations: int = 500
    convergence_epsilon: float | None = None
    seed: int = 0


# The spring cools geometrically each iteration (the usual force-simulation
# temperature schedule) so the tug-of-war between anchors and collisions
# settles and the displacement criterion can actually fire.
_SPRING_DECAY = 0.9
# Overlapping pairs are pushed a bit past the required separation, scaled by
# the current spring strength: the next compression then lands on already
# separated disks instead of re-opening every contact in a packed cluster.
_CUSHION_GAIN = 2.0
# A residual overlap bound used for the final convergence verdict, well
# under the 0.005 guarantee tested downstream.
_RESOLVE_TOL_FRACTION = 0.002
# Cap on collision passes within one simulation step; deeper compression
# waves keep propagating across subsequent iterations instead.
_MAX_RESOLVE_PASSES = 40


def _pair_distances(pos: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coordinate differences and distances, diagonal set to infinity.

    Differences are taken directly (not via the expanded quadratic form) so
    bitwise-equal points measure exactly zero and are detected as coincident.
    """
    dx = pos[:, 0][:, None] - pos[:, 0][None, :]
    dy = pos[:, 1][:, None] - pos[:, 1][None, :]
    dist = np.sqrt(dx * dx + dy * dy)
    np.fill_diagonal(dist, np.inf)
    return dx, dy, dist


def _resolve_collisions(
    pos: np.ndarray,
    required: np.ndarray,
    rng: np.random.Generator,
    cushion: float,
    max_passes: int = _MAX_RESOLVE_PASSES,
) -> np.ndarray:
    """Push overlapping disks apart until no pair is closer than required.

    Simultaneous relaxation: each pass accumulates the half-corrections a
    node receives from all its overlapping pairs, so the result does not
    depend on pair order. Pushes aim at ``required * cushion``, slightly
    past the bare minimum. Exactly-coincident pairs get a random unit split
    direction from the seeded generator, drawn in pair order.
    """
    for _ in range(max_passes):
        dx, dy, dist = _pair_distances(pos)
        coincident = dist < 1e-12
        active = (required - dist) > 0
        if not active.any() and not coincident.any():
            break
        usable = active & ~coincident
        target = required * cushion
        push = np.where(usable, np.maximum(target - dist, 0.0), 0.0) / np.where(
            usable, dist, 1.0
        )
        move_x = 0.5 * (push * dx).sum(axis=1)
        move_y = 0.5 * (push * dy).sum(axis=1)
        if coincident.any():
            ii, jj = np.nonzero(np.triu(coincident))
            angles = rng.uniform(0.0, 2.0 * math.pi, size=len(ii))
            amount = 0.5 * target[ii, jj]
            np.add.at(move_x, ii, amount * np.cos(angles))
            np.add.at(move_y, ii, amount * np.sin(angles))
            np.add.at(move_x, jj, -amount * np.cos(angles))
            np.add.at(move_y, jj, -amount * np.sin(angles))
        pos = pos + np.stack([move_x, move_y], axis=1)
    return pos


def _collision_components(dist: np.ndarray, threshold: np.ndarray) -> list[np.ndarray]:
    """Connected components of the near-collision graph, smallest index first.

    Collisions only interact locally, so each component can be resolved on
    its own; this keeps the per-pass cost proportional to the component, not
    the whole node set.
    """
    adjacent = dist < threshold
    n = adjacent.shape[0]
    seen = np.zeros(n, dtype=bool)
    components = []
    for start in range(n):
        if seen[start]:
            continue
        frontier = np.zeros(n, dtype=bool)
        frontier[start] = True
        component = np.zeros(n, dtype=bool)
        while frontier.any():
            component |= frontier
            frontier = adjacent[frontier].any(axis=0) & ~component
        seen |= component
        members = np.nonzero(component)[0]
        if len(members) > 1:
            components.append(members)
    return components


def deoverlap(
    anchors: np.ndarray,
    radii: "np.ndarray | float",
    params: DeoverlapParams = DeoverlapParams(),
) -> np.ndarray:
    """Spread disks so they stop overlapping while staying near their anchors.

    ``anchors`` is (n, 2); ``radii`` a scalar or per-node array. Each
    iteration applies the anchor spring and then resolves collisions to full
    separation within each component of nearby disks. The result is
    bit-deterministic for a fixed seed.
    """
    pos = np.array(anchors, dtype=np.float64, copy=True)
    n = pos.shape[0]
    if n <= 1:
        return pos
    r = np.broadcast_to(np.asarray(radii, dtype=np.float64), (n,)).copy()
    if np.any(r <= 0):
        raise LayoutConfigError("radii must be positive")
    anchors = np.asarray(anchors, dtype=np.float64)
    mean_radius = float(r.mean())
    eps = params.convergence_epsilon
    if eps is None:
        eps = 1e-3 * mean_radius
    tol = _RESOLVE_TOL_FRACTION * mean_radius

    rng = np.random.Generator(np.random.Philox(params.seed))
    required = r[:, None] + r[None, :] + params.padding

    alpha = 1.0
    for _ in range(params.max_iterations):
        before = pos.copy()
        pos += params.anchor_strength * alpha * (anchors - pos)
        cushion = 1.0 + _CUSHION_GAIN * params.anchor_strength * alpha

        _, _, dist = _pair_distances(pos)
        # The margin absorbs movement during the resolution passes; pushes
        # that escape a component are caught on the next iteration.
        proximity = required + 0.5 * mean_radius
        for members in _collision_components(dist, proximity):
            pos[members] = _resolve_collisions(
                pos[members], required[np.ix_(members, members)], rng, cushion
            )

        alpha *= _SPRING_DECAY
        if np.max(np.abs(pos - before)) < eps:
            _, _, dist = _pair_distances(pos)
            if np.all(required - dist <= tol):
                break

    return pos


# ---------------------------------------------------------------------------
# Glyphs and graph layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GlyphNode:
    """A ring glyph for one sentence with its tag dots placed inside."""

    sentence_id: str
    anchor: tuple[float, float]
    position: tuple[float, float]
    ring_radius: float
    tag_dots: tuple[tuple[int, float, float, float], ...]  # (category id, dx, dy, radius)

    def to_json(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "anchor": list(self.anchor),
            "position": list(self.position),
            "ring_radius": self.ring_radius,
            "tag_dots": [
                {"category_id": c, "dx": dx, "dy": dy, "radius": rr}
                for c, dx, dy, rr in self.tag_dots
            ],
        }


@dataclass(frozen=True)
class GraphLayout:
    nodes: tuple[GlyphNode, ...]
    edges: dict[int, tuple[tuple[str, str], ...]]  # category id -> sentence id pairs
    bounds: tuple[float, float, float, float]  # min_x, min_y, max_x, max_y

    def to_json(self) -> dict:
        return {
            "view": "graph",
            "nodes": [n.to_json() for n in self.nodes],
            "edges": {
                str(cid): [list(e) for e in pairs] for cid, pairs in self.edges.items()
            },
            "bounds": list(self.bounds),
        }


# Tag dots sit on a ring at this fraction of the glyph radius.
DOT_ORBIT_FRACTION = 0.55
# Cap on a dot's radius relative to the glyph radius.
DOT_RADIUS_FRACTION = 0.3
# Minimum clearance kept between neighboring dots, as a fraction of radius.
DOT_HAIRLINE_FRACTION = 0.02


def glyph_spec(sentence: Sentence, ring_radius: float) -> GlyphNode:
    """Place a sentence's tag dots inside a ring of the given radius.

    A single tag sits at the center; k tags sit at the vertices of a regular
    k-gon on an inner orbit, ordered by ascending category id starting from
    the top. Dot radii shrink with k so neighbors never touch, and dots always stay
    strictly inside the ring.
    """
    k = len(sentence.tags)
    if k < 1:
        raise LayoutConfigError(f"sentence {sentence.id!r} has no tags")
    hairline = DOT_HAIRLINE_FRACTION * ring_radius
    if k == 1:
        dots = ((sentence.tags[0], 0.0, 0.0, DOT_RADIUS_FRACTION * ring_radius),)
    else:
        orbit = DOT_ORBIT_FRACTION * ring_radius
        chord = 2.0 * orbit * math.sin(math.pi / k)
        dot_radius = min(DOT_RADIUS_FRACTION * ring_radius, chord / 2.0 - hairline)
        dots = []
        for i, cid in enumerate(sentence.tags):
            angle = -math.pi / 2.0 + 2.0 * math.pi * i / k
            dots.append((cid, orbit * math.cos(angle), orbit * math.sin(angle), dot_radius))
        dots = tuple(dots)
    return GlyphNode(sentence.id, (0.0, 0.0), (0.0, 0.0), ring_radius, dots)


def _euclidean_mst(points: np.ndarray) -> list[tuple[int, int]]:
    """Prim's algorithm over all pairs; ties broken by lowest index."""
    k = points.shape[0]
    if k < 2:
        return []
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    in_tree = np.zeros(k, dtype=bool)
    in_tree[0] = True
    best_cost = dist[0].copy()
    best_from = np.zeros(k, dtype=np.intp)
    edges = []
    for _ in range(k - 1):
        candidates = np.where(in_tree, np.inf, best_cost)
        nxt = int(np.argmin(candidates))  # argmin returns the lowest index on ties
        edges.append((int(best_from[nxt]), nxt))
        in_tree[nxt] = True
        closer = dist[nxt] < best_cost
        best_cost = np.where(closer, dist[nxt], best_cost)
        best_from = np.where(closer, nxt, best_from)
    return edges


def category_edges(
    doc: Document,
    positions: np.ndarray,
    strategy: str = "mst",
) -> dict[int, tuple[tuple[str, str], ...]]:
    """Connect the member sentences of each category.

    ``mst`` (default) links members by the Euclidean minimum spanning tree
    over their final positions; ``complete`` links every pair. Categories
    with fewer than two members yield no edges. Edge endpoints are sentence
    ids, each pair ordered by sentence index.
    """
    if strategy not in ("mst", "complete"):
        raise LayoutConfigError(f"unknown edge strategy {strategy!r}")
    positions = np.asarray(positions, dtype=np.float64)
    members: dict[int, list[int]] = {}
    for i, sent in enumerate(doc.sentences):
        for t in sent.tags:
            members.setdefault(t, []).append(i)

    out: dict[int, tuple[tuple[str, str], ...]] = {}
    for cid in sorted(members):
        idx = members[cid]
        if len(idx) < 2:
            continue
        if strategy == "complete":
            pairs = [
                (doc.sentences[a].id, doc.sentences[b].id)
                for pos_a, a in enumerate(idx)
                for b in idx[pos_a + 1 :]
            ]
        else:
            local = _euclidean_mst(positions[idx])
            pairs = []
            for a, b in local:
                ga, gb = idx[a], idx[b]
                if ga > gb:
                    ga, gb = gb, ga
                pairs.append((doc.sentences[ga].id, doc.sentences[gb].id))
            pairs.sort(key=lambda e: (e[0], e[1]))
        out[cid] = tuple(pairs)
    return out


def _scale_to_canvas(anchors: np.ndarray, canvas: float, margin: float) -> np.ndarray:
    """Fit anchor coordinates into a square canvas, preserving aspect ratio."""
    lo = anchors.min(axis=0)
    hi = anchors.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1]))
    usable = canvas - 2.0 * margin
    if span <= 0.0:
        return np.full_like(anchors, canvas / 2.0)
    scaled = (anchors - (lo + hi) / 2.0) * (usable / span)
    return scaled + canvas / 2.0


@dataclass(frozen=True)
class GraphParams:
    """View parameters for the graph layout."""

    ring_radius: float = 8.0
    padding: float = 2.0
    anchor_strength: float = 0.1
    max_iterations: int = 500
    convergence_epsilon: float | None = None
    edge_strategy: str = "mst"
    canvas: float = 1000.0
    seed: int = 0


def graph_layout(
    doc: Document,
    anchors: np.ndarray,
    params: GraphParams = GraphParams(),
) -> GraphLayout:
    """Compose the full graph view from per-sentence anchor coordinates.

    Anchors are scaled into the canvas, rings are spread apart by the
    de-overlap simulation, tag dots are placed inside each ring, and member
    edges are built per category over the final positions.
    """
    if len(doc.sentences) != len(anchors):
        raise LayoutConfigError(
            f"{len(anchors)} anchors for {len(doc.sentences)} sentences"
        )
    anchors = np.asarray(anchors, dtype=np.float64)
    if anchors.size == 0:
        return GraphLayout((), {}, (0.0, 0.0, 0.0, 0.0))

    scaled = _scale_to_canvas(anchors, params.canvas, margin=4.0 * params.ring_radius)
    positions = deoverlap(
        scaled,
        params.ring_radius,
        DeoverlapParams(
            anchor_strength=params.anchor_strength,
            padding=params.padding,
            max_iterations=params.max_iterations,
            convergence_epsilon=params.convergence_epsilon,
            seed=params.seed,
        ),
    )

    nodes = []
    for i, sent in enumerate(doc.sentences):
        glyph = glyph_spec(sent, params.ring_radius)
        nodes.append(
            GlyphNode(
                sent.id,
                (float(scaled[i, 0]), float(scaled[i, 1])),
                (float(positions[i, 0]), float(positions[i, 1])),
                glyph.ring_radius,
                glyph.tag_dots,
            )
        )

    edges = category_edges(doc, positions, params.edge_strategy)
    r = params.ring_radius
    bounds = (
        float(positions[:, 0].min() - r),
        float(positions[:, 1].min() - r),
        float(positions[:, 0].max() + r),
        float(positions[:, 1].max() + r),
    )
    return GraphLayout(tuple(nodes), edges, bounds)


# ---------------------------------------------------------------------------
# Waffle layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WaffleConfig:
    cell_size: float = 14.0
    row_width: float = 980.0
    gutter: float = 4.0

    def __post_init__(self):
        if self.cell_size <= 0 or self.row_width <= 0:
            raise LayoutConfigError("cell_size and row_width must be positive")
        if self.gutter < 0:
            raise LayoutConfigError("gutter must be non-negative")


@dataclass(frozen=True)
class WaffleBlock:
    """One sentence's run of equal-size tag cells."""

    sentence_id: str
    x: float
    y: float
    width: float
    height: float
    cells: tuple[tuple[int, float, float, float], ...]  # (category id, x, y, size)

    def to_json(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "x": self.x,
            "y": self.y,
            "width": self.width,
            "height": self.height,
            "cells": [
                {"category_id": c, "x": x, "y": y, "size": s}
                for c, x, y, s in self.cells
            ],
        }


@dataclass(frozen=True)
class WaffleRow:
    blocks: tuple[WaffleBlock, ...]


@dataclass(frozen=True)
class WaffleLayout:
    rows: tuple[WaffleRow, ...]
    cell_size: float
    width: float
    height: float

    def blocks_in_order(self) -> list[WaffleBlock]:
        return [b for row in self.rows for b in row.blocks]

    def to_json(self) -> dict:
        return {
            "view": "waffle",
            "cell_size": self.cell_size,
            "width": self.width,
            "height": self.height,
            "rows": [[b.to_json() for b in row.blocks] for row in self.rows],
        }


def waffle_layout(doc: Document, config: WaffleConfig = WaffleConfig()) -> WaffleLayout:
    """Pack sentence blocks greedily into rows, preserving reading order.

    Each block is one sentence: its tags in ascending category-id order as a
    horizontal run of equal squares. A block that would cross the row width
    starts the next row. Raises :class:`LayoutConfigError` when some block
    is wider than a row can fit.
    """
    widest = max((len(s.tags) for s in doc.sentences), default=0) * config.cell_size
    if widest > config.row_width:
        raise LayoutConfigError(
            f"a {widest:g}-wide sentence block cannot fit the {config.row_width:g}-wide row"
        )

    rows: list[list[WaffleBlock]] = [[]]
    x = 0.0
    y = 0.0
    row_height = config.cell_size
    for sent in doc.sentences:
        width = len(sent.tags) * config.cell_size
        if x > 0.0 and x + width > config.row_width:
            rows.append([])
            x = 0.0
            y += row_height + config.gutter
        cells = tuple(
            (cid, x + j * config.cell_size, y, config.cell_size)
            for j, cid in enumerate(sent.tags)
        )
        rows[-1].append(WaffleBlock(sent.id, x, y, width, row_height, cells))
        x += width + config.gutter

    packed = tuple(WaffleRow(tuple(blocks)) for blocks in rows if blocks)
    height = y + row_height if packed else 0.0
    return WaffleLayout(packed, config.cell_size, config.row_width, height)


# ---------------------------------------------------------------------------
# Matrix layout
# ---------------------------------------------------------------------------

NORMALIZATIONS = ("raw-max", "conditional")
MATRIX_ORDERS = ("id", "frequency")


@dataclass(frozen=True, eq=False)
class MatrixLayout:
    """Heatmap values in [0, 1] plus the raw counts they came from."""

    order: tuple[int, ...]  # category ids in display order
    values: np.ndarray
    counts: np.ndarray
    normalization: str

    def to_json(self) -> dict:
        return {
            "view": "matrix",
            "order": list(self.order),
            "values": [[float(v) for v in row] for row in self.values],
            "counts": self.counts.tolist(),
            "normalization": self.normalization,
        }


def matrix_layout(
    m: CoOccurrenceMatrix,
    normalization: str = "raw-max",
    order: str = "id",
) -> MatrixLayout:
    """Normalize co-occurrence counts for heatmap display.

    ``raw-max`` divides by the matrix maximum (an all-zero matrix stays
    zero). ``conditional`` divides row i by its diagonal count, giving the
    probability of the column category given the row one; rows with a zero
    diagonal stay zero. Conditional output is row-normalized and generally
    not symmetric. Display order is by category id, or by descending
    frequency with ``order="frequency"``.
    """
    if normalization not in NORMALIZATIONS:
        raise LayoutConfigError(f"unknown normalization {normalization!r}")
    if order not in MATRIX_ORDERS:
        raise LayoutConfigError(f"unknown matrix order {order!r}")

    counts = np.asarray(m.counts, dtype=np.int64)
    n = counts.shape[0]
    ids = np.arange(1, n + 1)
    if order == "frequency":
        diag = np.diag(counts)
        perm = np.lexsort((ids, -diag))  # descending frequency, id breaks ties
    else:
        perm = np.arange(n)
    counts = counts[np.ix_(perm, perm)]

    if normalization == "raw-max":
        peak = counts.max()
        values = counts / peak if peak > 0 else np.zeros_like(counts, dtype=np.float64)
    else:
        diag = np.diag(counts).astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(diag[:, None] > 0, counts / diag[:, None], 0.0)

    return MatrixLayout(
        tuple(int(ids[i]) for i in perm),
        values.astype(np.float64),
        counts,
        normalization,
    )
