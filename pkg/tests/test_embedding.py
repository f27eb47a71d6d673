from __future__ import annotations

import math

import numpy as np
import pytest

from nearby.embedding import (
    ConfigError,
    EmbeddingConfig,
    conditional_affinities,
    kl_divergence,
    pairwise_distances,
    symmetrize,
    tsne_embed,
    tsne_gradient,
    vectorize,
)

from conftest import make_doc, random_doc


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------


def oracle_distances(matrix):
    n = len(matrix)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            s = 0.0
            for a, b in zip(matrix[i], matrix[j]):
                s += (a - b) ** 2
            out[i, j] = math.sqrt(s)
    return out


def oracle_row_perplexity(row):
    """exp of the Shannon entropy of one probability row."""
    h = -sum(p * math.log(p) for p in row if p > 0)
    return math.exp(h)


def oracle_bandwidth_row(sq_dists, perplexity):
    """Solve the one-row bandwidth equation by long plain bisection."""

    def row_for(beta):
        weights = [math.exp(-beta * d) for d in sq_dists]
        total = sum(weights)
        return [w / total for w in weights]

    lo, hi = 1e-12, 1.0
    while oracle_row_perplexity(row_for(hi)) > perplexity:
        hi *= 2.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if oracle_row_perplexity(row_for(mid)) > perplexity:
            lo = mid
        else:
            hi = mid
    return row_for((lo + hi) / 2.0)


def oracle_kl(p, y):
    n = len(p)
    num = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                num[i, j] = 1.0 / (1.0 + np.sum((y[i] - y[j]) ** 2))
    q = num / num.sum()
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j and p[i, j] > 0:
                total += p[i, j] * math.log(p[i, j] / max(q[i, j], 1e-12))
    return total


def random_joint_p(rng, n):
    """A symmetric probability matrix with zero diagonal."""
    raw = rng.random((n, n))
    raw = raw + raw.T
    np.fill_diagonal(raw, 0.0)
    return raw / raw.sum()


# ---------------------------------------------------------------------------
# vectorize / distances
# ---------------------------------------------------------------------------


class TestVectorize:
    def test_single_tag(self):
        vectors = vectorize(make_doc([(1,)]))
        assert vectors[0].components[0] == 1.0
        assert vectors[0].components[1:].sum() == 0.0

    def test_all_tags(self):
        vectors = vectorize(make_doc([tuple(range(1, 18))]))
        assert vectors[0].components.sum() == 17.0

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        doc = random_doc(rng, 50)
        for sent, vec in zip(doc.sentences, vectorize(doc)):
            assert vec.tag_ids() == sent.tags
            assert vec.sentence_id == sent.id


class TestDistances:
    def test_identical_vectors(self):
        doc = make_doc([(1, 2), (1, 2)])
        assert pairwise_distances(vectorize(doc))[0, 1] == 0.0

    def test_four_differing_components(self):
        doc = make_doc([(1, 2), (3, 4)])
        assert pairwise_distances(vectorize(doc))[0, 1] == pytest.approx(2.0)

    def test_matches_component_loop(self):
        rng = np.random.default_rng(2)
        doc = random_doc(rng, 25)
        vectors = vectorize(doc)
        got = pairwise_distances(vectors)
        want = oracle_distances([v.components for v in vectors])
        assert np.allclose(got, want, atol=1e-12)
        assert np.array_equal(got, got.T)
        assert np.all(np.diag(got) == 0.0)

    def test_jaccard_metric(self):
        doc = make_doc([(1, 2), (2, 3)])
        d = pairwise_distances(vectorize(doc), metric="jaccard")
        assert d[0, 1] == pytest.approx(1 - 1 / 3)


# ---------------------------------------------------------------------------
# affinities
# ---------------------------------------------------------------------------


class TestConditionalAffinities:
    def test_equidistant_rows_are_uniform(self):
        n = 6
        d = np.ones((n, n)) - np.eye(n)
        p = conditional_affinities(d, perplexity=1.5)
        off = ~np.eye(n, dtype=bool)
        assert np.allclose(p[off], 1.0 / (n - 1))
        assert np.allclose(p.sum(axis=1), 1.0)

    def test_achieved_perplexity_on_random_inputs(self):
        rng = np.random.default_rng(3)
        for trial in range(5):
            n = 50
            x = rng.random((n, 8))
            d = pairwise_distances(x)
            target = float(rng.uniform(2.0, 15.0))
            p = conditional_affinities(d, target)
            assert np.allclose(p.sum(axis=1), 1.0, atol=1e-9)
            assert np.all(np.diag(p) == 0.0)
            for i in range(n):
                achieved = oracle_row_perplexity(p[i][p[i] > 0])
                assert abs(achieved - target) <= 1e-5

    def test_three_point_instance_matches_scalar_solve(self):
        d = np.array(
            [
                [0.0, 1.0, 2.0],
                [1.0, 0.0, 1.5],
                [2.0, 1.5, 0.0],
            ]
        )
        target = 1.3
        p = conditional_affinities(d, target)
        for i in range(3):
            sq = [d[i, j] ** 2 for j in range(3) if j != i]
            want = oracle_bandwidth_row(sq, target)
            got = [p[i, j] for j in range(3) if j != i]
            assert got == pytest.approx(want, abs=1e-4)

    def test_degenerate_row_falls_back_to_uniform(self):
        d = np.zeros((4, 4))
        p = conditional_affinities(d, perplexity=1.01)
        off = ~np.eye(4, dtype=bool)
        assert np.allclose(p[off], 1.0 / 3.0)

    def test_rejects_bad_perplexity(self):
        d = np.ones((3, 3)) - np.eye(3)
        with pytest.raises(ValueError):
            conditional_affinities(d, perplexity=3.0)


class TestSymmetrize:
    def test_symmetric_input_divides_by_n(self):
        # An equidistant configuration yields a symmetric conditional matrix.
        d = np.ones((6, 6)) - np.eye(6)
        p_cond = conditional_affinities(d, 1.5)
        p = symmetrize(p_cond)
        off = ~np.eye(6, dtype=bool)
        assert np.allclose(p[off], p_cond[off] / 6.0)

    def test_output_symmetric_and_normalized(self):
        rng = np.random.default_rng(5)
        for trial in range(10):
            raw = rng.random((8, 8))
            np.fill_diagonal(raw, 0.0)
            p_cond = raw / raw.sum(axis=1, keepdims=True)
            p = symmetrize(p_cond)
            assert np.array_equal(p, p.T)
            assert p.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(p >= 1e-12)

    def test_uniform_stays_uniform(self):
        n = 5
        p_cond = (np.ones((n, n)) - np.eye(n)) / (n - 1)
        p = symmetrize(p_cond)
        off = ~np.eye(n, dtype=bool)
        assert np.allclose(p[off], 1.0 / (n * (n - 1)))


# ---------------------------------------------------------------------------
# gradient / objective
# ---------------------------------------------------------------------------


class TestGradient:
    def test_coincident_uniform_is_zero(self):
        n = 6
        p = (np.ones((n, n)) - np.eye(n)) / (n * (n - 1))
        y = np.zeros((n, 2))
        assert np.allclose(tsne_gradient(p, y), 0.0)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(6)
        worst = 0.0
        for trial in range(20):
            n = int(rng.integers(5, 16))
            p = random_joint_p(rng, n)
            y = rng.standard_normal((n, 2))
            analytic = tsne_gradient(p, y)
            fd = np.zeros_like(y)
            h = 1e-5
            for i in range(n):
                for k in range(2):
                    plus = y.copy()
                    plus[i, k] += h
                    minus = y.copy()
                    minus[i, k] -= h
                    fd[i, k] = (kl_divergence(p, plus) - kl_divergence(p, minus)) / (2 * h)
            scale = max(np.abs(fd).max(), np.abs(analytic).max(), 1e-12)
            worst = max(worst, float(np.abs(analytic - fd).max() / scale))
        assert worst < 1e-4

    def test_translation_invariance(self):
        rng = np.random.default_rng(7)
        p = random_joint_p(rng, 9)
        y = rng.standard_normal((9, 2))
        g1 = tsne_gradient(p, y)
        g2 = tsne_gradient(p, y + np.array([13.7, -4.2]))
        assert np.allclose(g1, g2, atol=1e-9)


class TestKlDivergence:
    def test_zero_when_q_equals_p(self):
        rng = np.random.default_rng(8)
        y = rng.standard_normal((7, 2))
        # Build P with the same kernel arithmetic the implementation uses,
        # so Q equals P bitwise and the divergence is exactly zero.
        sq = np.sum(y * y, axis=1)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (y @ y.T), 0.0)
        num = 1.0 / (1.0 + d2)
        np.fill_diagonal(num, 0.0)
        p = num / num.sum()
        assert kl_divergence(p, y) == 0.0

    def test_non_negative(self):
        rng = np.random.default_rng(9)
        for trial in range(20):
            n = int(rng.integers(4, 12))
            p = random_joint_p(rng, n)
            y = rng.standard_normal((n, 2))
            assert kl_divergence(p, y) >= 0.0

    def test_matches_double_loop(self):
        rng = np.random.default_rng(10)
        p = random_joint_p(rng, 8)
        y = rng.standard_normal((8, 2))
        assert kl_divergence(p, y) == pytest.approx(oracle_kl(p, y), rel=1e-12)


# ---------------------------------------------------------------------------
# full embedding
# ---------------------------------------------------------------------------


def two_cluster_doc():
    return make_doc([(1, 2)] * 20 + [(9, 10)] * 20, doc_id="clusters")


class TestEmbed:
    def test_deterministic(self):
        doc = two_cluster_doc()
        a = tsne_embed(vectorize(doc), EmbeddingConfig(seed=42, iterations=300))
        b = tsne_embed(vectorize(doc), EmbeddingConfig(seed=42, iterations=300))
        assert a.positions.tobytes() == b.positions.tobytes()
        c = tsne_embed(vectorize(doc), EmbeddingConfig(seed=43, iterations=300))
        assert a.positions.tobytes() != c.positions.tobytes()

    def test_cluster_separation(self):
        result = tsne_embed(vectorize(two_cluster_doc()), EmbeddingConfig(seed=1))
        pos = result.positions
        a, b = pos[:20], pos[20:]
        spread = max(
            np.linalg.norm(a - a.mean(axis=0), axis=1).max(),
            np.linalg.norm(b - b.mean(axis=0), axis=1).max(),
        )
        gap = np.linalg.norm(a.mean(axis=0) - b.mean(axis=0))
        assert gap > 3.0 * spread
        assert gap > 0.0

    def test_duplicates_collapse_to_identical_coordinates(self):
        rng = np.random.default_rng(11)
        doc = random_doc(rng, 60)
        result = tsne_embed(vectorize(doc), EmbeddingConfig(seed=2, iterations=260))
        by_combo = {}
        for sent, row in zip(doc.sentences, result.positions):
            by_combo.setdefault(sent.tags, []).append(row)
        for rows in by_combo.values():
            for row in rows[1:]:
                assert np.array_equal(row, rows[0])

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(12)
        doc = random_doc(rng, 40)
        config = EmbeddingConfig(seed=5, iterations=260)
        base = tsne_embed(vectorize(doc), config).positions
        perm = rng.permutation(len(doc.sentences))
        shuffled = make_doc([doc.sentences[i].tags for i in perm], doc_id="shuffled")
        permuted = tsne_embed(vectorize(shuffled), config).positions
        assert np.array_equal(permuted, base[perm])

    def test_kl_trace_improves_after_exaggeration(self):
        rng = np.random.default_rng(13)
        for trial in range(3):
            doc = random_doc(rng, 100)
            result = tsne_embed(vectorize(doc), EmbeddingConfig(seed=trial))
            trace = result.kl_trace
            assert len(trace) == 20  # every 50 of 1000 iterations
            assert trace[-1] <= trace[4]  # final vs end of exaggeration
            assert all(v >= 0.0 for v in trace)

    def test_single_combination_collapses_to_origin(self):
        doc = make_doc([(2, 4)] * 10)
        result = tsne_embed(vectorize(doc), EmbeddingConfig(seed=3))
        assert np.array_equal(result.positions, np.zeros((10, 2)))
        assert result.n_distinct == 1

    def test_config_errors(self):
        with pytest.raises(ConfigError):
            tsne_embed(vectorize(make_doc([(1,), (2,)])), EmbeddingConfig())
        with pytest.raises(ConfigError):
            EmbeddingConfig(perplexity=-1.0)
        with pytest.raises(ConfigError):
            EmbeddingConfig(metric="cosine")

    def test_oversized_perplexity_clamps_instead_of_failing(self):
        doc = make_doc([(1,), (2,), (3,), (4,)])
        result = tsne_embed(vectorize(doc), EmbeddingConfig(perplexity=50.0, seed=0, iterations=60))
        assert result.effective_perplexity == pytest.approx(1.0)

    def test_effective_perplexity_clamp(self):
        doc = make_doc([(1,), (2,), (3,), (4,), (5,), (6,), (7,)])
        result = tsne_embed(vectorize(doc), EmbeddingConfig(seed=0, iterations=60))
        assert result.effective_perplexity == pytest.approx((7 - 1) / 3.0)

    def test_json_round_trip_shape(self):
        doc = two_cluster_doc()
        result = tsne_embed(vectorize(doc), EmbeddingConfig(seed=4, iterations=120))
        payload = result.to_json()
        assert len(payload["positions"]) == 40
        assert payload["config"]["seed"] == 4
        assert payload["n_distinct"] == 2
