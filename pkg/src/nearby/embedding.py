"""2D embedding of sentence tag vectors.

Each sentence becomes a 17-dimensional binary presence vector; those vectors
are embedded into the plane by stochastic neighbor embedding with a Student-t
low-dimensional kernel: Gaussian input affinities calibrated per point to a
target perplexity, then gradient descent on the KL divergence between the
input and output neighbor distributions, with early exaggeration and a
momentum switch partway through.

Duplicate tag combinations are collapsed to a single point before the
optimization (zero-distance duplicates would make the bandwidth search
degenerate) and expanded back to per-sentence rows afterwards, so sentences
with equal tag sets receive equal anchor coordinates. The de-overlap pass in
the layout module fans them out.

Everything is O(n^2) exact and deterministic: all randomness flows from one
counter-based generator seeded by the config, and distinct combinations are
iterated in a canonical (lexicographic) order independent of input order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .corpus import Document

__all__ = [
    "TagVector",
    "EmbeddingConfig",
    "EmbeddingResult",
    "ConfigError",
    "vectorize",
    "pairwise_distances",
    "conditional_affinities",
    "symmetrize",
    "tsne_gradient",
    "kl_divergence",
    "tsne_embed",
]

N_COMPONENTS = 17

# Probabilities below this floor are clamped to keep logs finite.
EPS = 1e-12


class ConfigError(Exception):
    """Raised for embedding configurations that cannot be run."""


@dataclass(frozen=True, eq=False)
class TagVector:
    """Binary category-presence vector for one sentence."""

    sentence_id: str
    components: np.ndarray  # shape (17,), values 0.0 or 1.0

    def tag_ids(self) -> tuple[int, ...]:
        return tuple(int(i) + 1 for i in np.flatnonzero(self.components))


@dataclass(frozen=True)
class EmbeddingConfig:
    """Optimizer hyperparameters.

    ``perplexity`` is clamped to (k - 1) / 3 for small inputs, where k is
    the number of distinct tag combinations. ``momentum`` starts at
    ``momentum_start`` and switches to ``momentum_final`` at the iteration
    where early exaggeration ends.
    """

    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_start: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    seed: int = 0
    metric: str = "euclidean"  # or "jaccard"

    def __post_init__(self):
        if self.perplexity <= 0:
            raise ConfigError(f"perplexity must be positive, got {self.perplexity}")
        if self.iterations <= 0:
            raise ConfigError(f"iterations must be positive, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.metric not in ("euclidean", "jaccard"):
            raise ConfigError(f"unknown metric {self.metric!r}")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class EmbeddingResult:
    """Anchor coordinates per sentence plus optimizer diagnostics."""

    positions: np.ndarray  # shape (n, 2), sentence order
    kl_trace: tuple[float, ...]  # KL against the plain affinities, every 50 iters
    config: EmbeddingConfig
    n_points: int
    n_distinct: int
    effective_perplexity: float

    def to_json(self) -> dict:
        return {
            "positions": [[float(x), float(y)] for x, y in self.positions],
            "kl_trace": [float(v) for v in self.kl_trace],
            "config": self.config.to_json(),
            "n_points": self.n_points,
            "n_distinct": self.n_distinct,
            "effective_perplexity": self.effective_perplexity,
        }


def vectorize(doc: Document, n_components: int = N_COMPONENTS) -> list[TagVector]:
    """One binary vector per sentence, in sentence order.

    Component ``i`` is 1 exactly when category id ``i + 1`` is in the tag set.
    """
    vectors = []
    for sent in doc.sentences:
        v = np.zeros(n_components, dtype=np.float64)
        for t in sent.tags:
            v[t - 1] = 1.0
        vectors.append(TagVector(sent.id, v))
    return vectors


def _as_matrix(vectors: "list[TagVector] | np.ndarray") -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        return np.asarray(vectors, dtype=np.float64)
    return np.stack([v.components for v in vectors]).astype(np.float64)


def pairwise_distances(
    vectors: "list[TagVector] | np.ndarray", metric: str = "euclidean"
) -> np.ndarray:
    """Symmetric distance matrix with zero diagonal.

    Euclidean distance between binary vectors equals the square root of the
    Hamming distance. Jaccard distance (1 - overlap/union) is available as
    an alternative metric.
    """
    x = _as_matrix(vectors)
    n = x.shape[0]
    if metric == "euclidean":
        sq = np.sum(x * x, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
        np.maximum(d2, 0.0, out=d2)
        d = np.sqrt(d2)
    elif metric == "jaccard":
        inter = x @ x.T
        sizes = np.sum(x, axis=1)
        union = sizes[:, None] + sizes[None, :] - inter
        with np.errstate(invalid="ignore"):
            d = 1.0 - np.where(union > 0, inter / np.maximum(union, 1.0), 1.0)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    np.fill_diagonal(d, 0.0)
    return (d + d.T) / 2.0  # enforce exact symmetry


def _row_affinity(sq_dists: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    """Normalized Gaussian affinities for one row and their perplexity.

    ``sq_dists`` are the squared distances to the other points. Exponents
    are shifted by the row minimum so the largest term is exp(0); the shift
    cancels in the normalization.
    """
    shifted = sq_dists - sq_dists.min()
    p = np.exp(-beta * shifted)
    total = p.sum()
    p /= total
    # Shannon entropy in nats; perplexity = exp(H).
    nz = p > 0
    entropy = -np.sum(p[nz] * np.log(p[nz]))
    return p, float(np.exp(entropy))


def conditional_affinities(
    distances: np.ndarray,
    perplexity: float,
    tol: float = 1e-5,
    max_steps: int = 200,
    weights: "np.ndarray | None" = None,
) -> np.ndarray:
    """Per-row Gaussian neighbor probabilities calibrated by binary search.

    For each row a bandwidth is found so the row's perplexity (exponential
    of its entropy) matches the target within ``tol``; rows sum to 1 and the
    diagonal is 0. Rows where every off-diagonal distance is zero cannot be
    calibrated and fall back to uniform probabilities, as do rows whose
    target is unreachable after ``max_steps`` bisections (the search then
    returns its best bandwidth).

    ``weights`` optionally scales each neighbor's unnormalized affinity, so
    a collapsed point can stand for several identical ones.
    """
    d = np.asarray(distances, dtype=np.float64)
    n = d.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    if not perplexity < n:
        raise ValueError(f"perplexity {perplexity} must be below the point count {n}")

    p = np.zeros((n, n), dtype=np.float64)
    others = ~np.eye(n, dtype=bool)
    for i in range(n):
        sq = d[i, others[i]] ** 2
        w = weights[others[i]] if weights is not None else None
        if np.all(sq == 0.0) and w is None:
            p[i, others[i]] = 1.0 / (n - 1)
            continue
        p[i, others[i]] = _calibrate_row(sq, perplexity, tol, max_steps, w)
    return p


def _calibrate_row(
    sq_dists: np.ndarray,
    perplexity: float,
    tol: float,
    max_steps: int,
    weights: "np.ndarray | None" = None,
) -> np.ndarray:
    beta = 1.0
    beta_min, beta_max = -np.inf, np.inf
    best = None
    for _ in range(max_steps):
        if weights is None:
            row, achieved = _row_affinity(sq_dists, beta)
        else:
            shifted = sq_dists - sq_dists.min()
            row = weights * np.exp(-beta * shifted)
            row /= row.sum()
            nz = row > 0
            achieved = float(np.exp(-np.sum(row[nz] * np.log(row[nz]))))
        best = row
        gap = achieved - perplexity
        if abs(gap) <= tol:
            break
        if gap > 0:  # too spread out: narrow the Gaussian
            beta_min = beta
            beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
    return best


def symmetrize(
    p_conditional: np.ndarray, weights: "np.ndarray | None" = None
) -> np.ndarray:
    """Joint probabilities from conditional ones.

    Averages each pair's two conditionals and normalizes the whole matrix to
    total mass 1, then floors entries at a small epsilon so downstream logs
    stay finite. With ``weights`` given, pair (i, j) is scaled by
    ``weights[i] * weights[j]`` before normalizing, which weights collapsed
    duplicate points by their multiplicity. Without weights this reduces to
    (P + P^T) / (2n).
    """
    p = np.asarray(p_conditional, dtype=np.float64)
    joint = p + p.T
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        joint = joint * np.outer(w, w)
    joint = joint / joint.sum()
    return np.maximum(joint, EPS)


def _student_t_kernel(y: np.ndarray) -> np.ndarray:
    """Unnormalized heavy-tailed similarities (1 + ||yi - yj||^2)^-1."""
    sq = np.sum(y * y, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (y @ y.T)
    np.maximum(d2, 0.0, out=d2)
    num = 1.0 / (1.0 + d2)
    np.fill_diagonal(num, 0.0)
    return num


def tsne_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Exact gradient of KL(P || Q) with respect to the 2D positions.

    Q is the normalized Student-t kernel over ``y``. Row i of the gradient
    is 4 * sum_j (p_ij - q_ij) * (y_i - y_j) / (1 + ||y_i - y_j||^2).
    """
    num = _student_t_kernel(y)
    q = num / num.sum()
    pq = (p - q) * num
    return 4.0 * (y * pq.sum(axis=1)[:, None] - pq @ y)


def kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    """KL(P || Q) over off-diagonal entries, with Q floored at 1e-12."""
    num = _student_t_kernel(y)
    q = num / num.sum()
    q = np.maximum(q, EPS)
    mask = (p > 0) & ~np.eye(p.shape[0], dtype=bool)
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def _collapse(vectors: list[TagVector]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Group identical tag vectors.

    Returns the distinct vectors in lexicographic tag order, each point's
    multiplicity, and for every input row the index of its distinct point.
    The canonical ordering makes the optimization independent of input
    order (permuting the input permutes the output rows identically).
    """
    keys = [v.tag_ids() for v in vectors]
    distinct = sorted(set(keys))
    index_of = {k: i for i, k in enumerate(distinct)}
    groups = np.array([index_of[k] for k in keys], dtype=np.intp)
    multiplicity = np.bincount(groups, minlength=len(distinct)).astype(np.float64)
    x = np.zeros((len(distinct), N_COMPONENTS), dtype=np.float64)
    for i, key in enumerate(distinct):
        for t in key:
            x[i, t - 1] = 1.0
    return x, multiplicity, groups


def tsne_embed(
    vectors: list[TagVector], config: EmbeddingConfig = EmbeddingConfig()
) -> EmbeddingResult:
    """Embed tag vectors into 2D anchor coordinates.

    Deterministic for a fixed config: initial positions are drawn from a
    seeded Gaussian at scale 1e-4 over the canonically ordered distinct
    combinations. Early exaggeration multiplies the input affinities for the
    first ``exaggeration_iters`` iterations; the KL trace is always measured
    against the plain affinities, sampled every 50 iterations.
    """
    n = len(vectors)
    if n < 4:
        raise ConfigError(f"need at least 4 vectors to embed, got {n}")

    x, multiplicity, groups = _collapse(vectors)
    k = x.shape[0]
    if k == 1:
        # Every sentence shares one combination: a single anchor at the origin.
        positions = np.zeros((n, 2), dtype=np.float64)
        return EmbeddingResult(positions, (0.0,), config, n, 1, 0.0)

    eff_perplexity = min(config.perplexity, (k - 1) / 3.0)
    distances = pairwise_distances(x, metric=config.metric)
    p_cond = conditional_affinities(distances, eff_perplexity, weights=multiplicity)
    p = symmetrize(p_cond, weights=multiplicity)

    rng = np.random.Generator(np.random.Philox(config.seed))
    y = 1e-4 * rng.standard_normal((k, 2))
    update = np.zeros_like(y)
    p_exaggerated = p * config.early_exaggeration

    kl_trace: list[float] = []
    for it in range(config.iterations):
        p_now = p_exaggerated if it < config.exaggeration_iters else p
        momentum = (
            config.momentum_start
            if it < config.momentum_switch_iter
            else config.momentum_final
        )
        grad = tsne_gradient(p_now, y)
        update = momentum * update - config.learning_rate * grad
        y = y + update
        y = y - y.mean(axis=0)
        if (it + 1) % 50 == 0 or it + 1 == config.iterations:
            kl_trace.append(kl_divergence(p, y))

    if not np.all(np.isfinite(y)):
        raise ConfigError(
            "optimization diverged; lower the learning rate or iteration count"
        )

    positions = y[groups]
    return EmbeddingResult(
        positions, tuple(kl_trace), config, n, k, float(eff_perplexity)
    )
