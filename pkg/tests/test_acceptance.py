"""Acceptance suite: one test per published criterion.

Each test prints a single pass/fail line (visible with ``pytest -s`` or in
the captured output) and enforces its wall-clock budget. Run with::

    pytest tests/test_acceptance.py -v
"""

from __future__ import annotations

import itertools
import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from fastapi.testclient import TestClient

from nearby import analytics, embedding
from nearby.cli import main
from nearby.corpus import (
    Corpus,
    DEFAULT_CATEGORIES,
    FilterSpec,
    apply_filter,
    category_by_key,
    parse_corpus,
    validate,
)
from nearby.layout import (
    DeoverlapParams,
    WaffleConfig,
    category_edges,
    deoverlap,
    waffle_layout,
)
from nearby.service import create_app

from conftest import make_doc, random_doc

BLANK = category_by_key("blank").id


@contextmanager
def criterion(number: int, name: str, budget_seconds: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {number:2d} ({name})")
        raise
    elapsed = time.perf_counter() - start
    print(f"[PASS] criterion {number:2d} ({name}) in {elapsed:.2f}s")
    assert elapsed < budget_seconds, (
        f"criterion {number} exceeded its {budget_seconds}s budget: {elapsed:.2f}s"
    )


def test_criterion_01_fixture_statistics(tmp_path):
    with criterion(1, "fixture statistics", budget_seconds=1.0):
        out = tmp_path / "fixture.json"
        assert main(["synth", "--out", str(out)]) == 0
        corpus = parse_corpus(out.read_bytes())
        report = validate(corpus)
        assert report.ok
        assert [s.sentence_count for s in report.stats] == [382, 374, 800, 79]
        counts = [len(s.tags) for d in corpus.documents for s in d.sentences]
        assert min(counts) == 1
        assert max(counts) <= 5
        assert abs(sum(counts) / len(counts) - 3.0) <= 0.1


def test_criterion_02_cooccurrence_oracle():
    with criterion(2, "co-occurrence oracle equivalence", budget_seconds=5.0):
        rng = np.random.default_rng(101)
        for _ in range(100):
            doc = random_doc(rng, int(rng.integers(1, 201)))
            counts = analytics.cooccurrence(doc).counts
            brute = np.zeros((17, 17), dtype=np.int64)
            for sent in doc.sentences:
                for t in sent.tags:
                    brute[t - 1, t - 1] += 1
                for a, b in itertools.combinations(sent.tags, 2):
                    brute[a - 1, b - 1] += 1
                    brute[b - 1, a - 1] += 1
            assert np.array_equal(counts, brute)
            assert np.array_equal(counts, counts.T)
            diag = np.diag(counts)
            off = ~np.eye(17, dtype=bool)
            bound = np.minimum(diag[:, None], diag[None, :])
            assert np.all(counts[off] <= bound[off])


def test_criterion_03_gradient_check():
    with criterion(3, "analytic gradient vs finite differences", budget_seconds=10.0):
        rng = np.random.default_rng(102)
        worst = 0.0
        for _ in range(20):
            n = int(rng.integers(5, 16))
            raw = rng.random((n, n))
            raw = raw + raw.T
            np.fill_diagonal(raw, 0.0)
            p = raw / raw.sum()
            y = rng.standard_normal((n, 2))
            analytic = embedding.tsne_gradient(p, y)
            fd = np.zeros_like(y)
            h = 1e-5
            for i in range(n):
                for k in range(2):
                    plus, minus = y.copy(), y.copy()
                    plus[i, k] += h
                    minus[i, k] -= h
                    fd[i, k] = (
                        embedding.kl_divergence(p, plus)
                        - embedding.kl_divergence(p, minus)
                    ) / (2 * h)
            scale = max(np.abs(fd).max(), np.abs(analytic).max(), 1e-12)
            worst = max(worst, float(np.abs(analytic - fd).max() / scale))
        assert worst < 1e-4


def test_criterion_04_perplexity_calibration():
    with criterion(4, "perplexity calibration", budget_seconds=5.0):
        rng = np.random.default_rng(103)
        for _ in range(5):
            n = 50
            points = rng.random((n, 6)) * rng.uniform(0.5, 3.0)
            distances = embedding.pairwise_distances(points)
            target = float(rng.uniform(2.0, (n - 1) / 3.0))
            p = embedding.conditional_affinities(distances, target)
            for i in range(n):
                row = p[i][p[i] > 0]
                achieved = 2.0 ** (-np.sum(row * np.log2(row)))
                assert abs(achieved - target) <= 1e-5


def test_criterion_05_kl_monotonic_improvement():
    with criterion(5, "KL improvement after exaggeration", budget_seconds=60.0):
        rng = np.random.default_rng(104)
        for trial in range(10):
            doc = random_doc(rng, 100)
            result = embedding.tsne_embed(
                embedding.vectorize(doc), embedding.EmbeddingConfig(seed=trial)
            )
            at_exaggeration_end = result.kl_trace[4]  # iteration 250
            assert result.kl_trace[-1] <= at_exaggeration_end


def test_criterion_06_cluster_separation():
    with criterion(6, "cluster separation", budget_seconds=10.0):
        doc = make_doc([(1, 2)] * 20 + [(9, 10)] * 20)
        result = embedding.tsne_embed(
            embedding.vectorize(doc), embedding.EmbeddingConfig(seed=11)
        )
        a, b = result.positions[:20], result.positions[20:]
        spread = max(
            np.linalg.norm(a - a.mean(axis=0), axis=1).max(),
            np.linalg.norm(b - b.mean(axis=0), axis=1).max(),
        )
        gap = float(np.linalg.norm(a.mean(axis=0) - b.mean(axis=0)))
        assert gap > 3.0 * spread
        assert gap > 0.0


def test_criterion_07_deoverlap_800_nodes():
    with criterion(7, "de-overlap at 800 nodes", budget_seconds=30.0):
        rng = np.random.default_rng(105)
        # Heavy duplication: 40 anchor spots, 20 exactly-coincident nodes each.
        anchors = np.repeat(rng.uniform(0, 1000, size=(40, 2)), 20, axis=0)
        radius = 8.0
        params = DeoverlapParams(padding=2.0, seed=13)
        pos = deoverlap(anchors, radius, params)
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        depth = np.maximum(2 * radius + 2.0 - dist, 0.0).max()
        assert depth <= 0.005 * radius
        again = deoverlap(anchors, radius, params)
        assert pos.tobytes() == again.tobytes()


def test_criterion_08_mst_edges():
    with criterion(8, "minimum spanning tree edges", budget_seconds=5.0):
        rng = np.random.default_rng(106)
        # Edge count and connectivity on a larger random document.
        doc = random_doc(rng, 60)
        pos = rng.uniform(0, 100, size=(60, 2))
        edges = category_edges(doc, pos, "mst")
        members = {}
        for s in doc.sentences:
            for t in s.tags:
                members.setdefault(t, set()).add(s.id)
        for cid, ids in members.items():
            if len(ids) < 2:
                assert cid not in edges
                continue
            assert len(edges[cid]) == len(ids) - 1
            parent = {i: i for i in ids}

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for a, b in edges[cid]:
                parent[find(a)] = find(b)
            assert len({find(i) for i in ids}) == 1

        # Optimality vs exhaustive enumeration for small member counts.
        for k in range(3, 8):
            doc = make_doc([(1,)] * k)
            pos = rng.uniform(0, 50, size=(k, 2))
            dist = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2))
            idx = {s.id: i for i, s in enumerate(doc.sentences)}
            got = sum(
                dist[idx[a], idx[b]] for a, b in category_edges(doc, pos, "mst")[1]
            )
            best = math.inf
            for subset in itertools.combinations(
                list(itertools.combinations(range(k), 2)), k - 1
            ):
                parent = list(range(k))

                def find2(x):
                    while parent[x] != x:
                        parent[x] = parent[parent[x]]
                        x = parent[x]
                    return x

                merged = 0
                for a, b in subset:
                    ra, rb = find2(a), find2(b)
                    if ra != rb:
                        parent[ra] = rb
                        merged += 1
                if merged == k - 1:
                    best = min(best, sum(dist[a, b] for a, b in subset))
            assert got == pytest.approx(best, rel=1e-9)


def test_criterion_09_waffle_conservation():
    with criterion(9, "waffle conservation and order", budget_seconds=2.0):
        rng = np.random.default_rng(107)
        for _ in range(50):
            doc = random_doc(rng, int(rng.integers(1, 100)))
            layout = waffle_layout(doc, WaffleConfig())
            blocks = layout.blocks_in_order()
            assert [b.sentence_id for b in blocks] == [s.id for s in doc.sentences]
            assert sum(len(b.cells) for b in blocks) == sum(
                len(s.tags) for s in doc.sentences
            )


def test_criterion_10_filter_semantics():
    with criterion(10, "filter semantics across views", budget_seconds=5.0):
        doc = make_doc(
            [(1, BLANK), (BLANK,), (2, 3), (4,), (5, 6), (1, 2)], doc_id="filters"
        )
        blank_only_id = doc.sentences[1].id
        spec = FilterSpec(exclude_categories={BLANK})
        filtered = apply_filter(doc, spec)

        assert analytics.tag_frequencies(filtered)[BLANK] == 0
        assert blank_only_id not in {s.id for s in filtered.sentences}

        corpus = Corpus(1, DEFAULT_CATEGORIES, (doc,))
        client = TestClient(create_app(corpus))
        body_filter = {"exclude": ["blank"]}

        graph = client.post(
            "/api/texts/filters/layout",
            json={
                "view": "graph",
                "filter": body_filter,
                "seed": 1,
                "embedding": {"iterations": 120},
            },
        ).json()
        assert blank_only_id not in {n["sentence_id"] for n in graph["nodes"]}
        assert BLANK not in {
            d["category_id"] for n in graph["nodes"] for d in n["tag_dots"]
        }

        waffle = client.post(
            "/api/texts/filters/layout",
            json={"view": "waffle", "filter": body_filter},
        ).json()
        waffle_ids = {b["sentence_id"] for row in waffle["rows"] for b in row}
        assert blank_only_id not in waffle_ids
        assert BLANK not in {
            c["category_id"] for row in waffle["rows"] for b in row for c in b["cells"]
        }

        matrix = client.post(
            "/api/texts/filters/layout",
            json={"view": "matrix", "filter": body_filter},
        ).json()
        blank_row = matrix["counts"][BLANK - 1]
        assert all(v == 0 for v in blank_row)
        assert all(row[BLANK - 1] == 0 for row in matrix["counts"])


def test_criterion_11_service_contract(synth_corpus):
    with criterion(11, "service contract and 800-sentence pipeline", budget_seconds=90.0):
        client = TestClient(create_app(synth_corpus))

        small_body = {"view": "graph", "seed": 3, "embedding": {"iterations": 300}}
        first = client.post("/api/texts/dc3/layout", json=small_body)
        second = client.post("/api/texts/dc3/layout", json=small_body)
        assert first.status_code == 200
        assert first.content == second.content

        assert client.post("/api/texts/zzz/layout", json=small_body).status_code == 404
        assert (
            client.post(
                "/api/texts/dc3/layout", json={"view": "graph", "filter": {"exclude": ["x"]}}
            ).status_code
            == 422
        )
        assert (
            client.post(
                "/api/texts/dc3/layout",
                content=b"{oops",
                headers={"content-type": "application/json"},
            ).status_code
            == 400
        )

        start = time.perf_counter()
        big = client.post("/api/texts/dc2/layout", json={"view": "graph", "seed": 5})
        elapsed = time.perf_counter() - start
        assert big.status_code == 200
        assert len(big.json()["nodes"]) == 800
        assert elapsed < 60.0, f"800-sentence pipeline took {elapsed:.1f}s"


def test_criterion_12_agreement_exact():
    with criterion(12, "agreement values", budget_seconds=5.0):
        doc = make_doc([(1, 2), (3,), (4, 5, 6), (7,)])
        assert analytics.agreement(doc, doc).mean_jaccard == 1.0

        a = make_doc([(1, 2)] * 4)
        b = make_doc([(1, 3)] * 4)
        assert analytics.agreement(a, b).mean_jaccard == 1 / 3
