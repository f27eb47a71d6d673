"""Tag statistics over documents.

Frequencies, pairwise co-occurrence, exact-combination multiplicities,
per-category summaries, and two-annotator agreement. Everything operates on
immutable documents and returns plain values; all counts stay integers here,
normalization for display happens in the layout module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import DEFAULT_CATEGORIES, Document, UnknownCategory

__all__ = [
    "CoOccurrenceMatrix",
    "DocumentSummary",
    "AgreementReport",
    "SentenceMismatch",
    "tag_frequencies",
    "cooccurrence",
    "combination_count",
    "combination_counts",
    "summarize",
    "agreement",
]

N_CATEGORIES = len(DEFAULT_CATEGORIES)


class SentenceMismatch(Exception):
    """Raised when two documents to compare do not share sentence ids."""


@dataclass(frozen=True, eq=False)
class CoOccurrenceMatrix:
    """Symmetric category-by-category sentence counts for one document.

    ``counts[i][j]`` (0-based over category ids ``i+1``, ``j+1``) is the
    number of sentences tagged with both categories; the diagonal holds
    plain frequencies.
    """

    document_id: str
    counts: np.ndarray
    n: int = N_CATEGORIES

    def to_json(self) -> dict:
        return {
            "document_id": self.document_id,
            "n": self.n,
            "counts": self.counts.tolist(),
        }


@dataclass(frozen=True)
class DocumentSummary:
    """Per-category counts and proportions of sentences in a document."""

    document_id: str
    sentence_count: int
    per_category: tuple[tuple[int, int, float], ...]  # (category id, count, proportion)

    def to_json(self) -> dict:
        return {
            "document_id": self.document_id,
            "sentence_count": self.sentence_count,
            "per_category": [
                {"category_id": c, "count": n, "proportion": p}
                for c, n, p in self.per_category
            ],
        }


@dataclass(frozen=True)
class AgreementReport:
    """Overlap between two annotators' tag sets for the same sentences."""

    per_sentence_jaccard: tuple[tuple[str, float], ...]
    mean_jaccard: float
    per_category: tuple[tuple[int, float], ...]

    def to_json(self) -> dict:
        return {
            "mean_jaccard": self.mean_jaccard,
            "per_sentence_jaccard": [
                {"sentence_id": s, "jaccard": v} for s, v in self.per_sentence_jaccard
            ],
            "per_category": [
                {"category_id": c, "agreement": v} for c, v in self.per_category
            ],
        }


def tag_frequencies(doc: Document, n_categories: int = N_CATEGORIES) -> dict[int, int]:
    """Number of sentences carrying each category; ids absent map to 0."""
    freq = dict.fromkeys(range(1, n_categories + 1), 0)
    for sent in doc.sentences:
        for t in sent.tags:
            if t in freq:
                freq[t] += 1
    return freq


def cooccurrence(doc: Document, n_categories: int = N_CATEGORIES) -> CoOccurrenceMatrix:
    """Sentence counts for every category pair (diagonal = frequency)."""
    counts = np.zeros((n_categories, n_categories), dtype=np.int64)
    for sent in doc.sentences:
        idx = [t - 1 for t in sent.tags if 1 <= t <= n_categories]
        for a in idx:
            counts[a, a] += 1
        for i, a in enumerate(idx):
            for b in idx[i + 1 :]:
                counts[a, b] += 1
                counts[b, a] += 1
    return CoOccurrenceMatrix(doc.id, counts, n_categories)


def combination_count(
    doc: Document,
    tags: "set[int] | frozenset[int]",
    superset: bool = False,
    known_ids: frozenset[int] | None = None,
) -> int:
    """Number of sentences whose tag set equals ``tags`` exactly.

    With ``superset=True``, counts sentences whose tag set contains ``tags``
    instead.
    """
    if not tags:
        raise ValueError("tags must be non-empty")
    if known_ids is None:
        known_ids = frozenset(range(1, N_CATEGORIES + 1))
    unknown = set(tags) - known_ids
    if unknown:
        raise UnknownCategory(f"unknown category ids {sorted(unknown)}")
    query = frozenset(tags)
    if superset:
        return sum(1 for s in doc.sentences if query <= s.tag_set)
    return sum(1 for s in doc.sentences if s.tag_set == query)


def combination_counts(doc: Document) -> dict[frozenset[int], int]:
    """Multiplicity of every distinct tag combination in the document."""
    out: dict[frozenset[int], int] = {}
    for sent in doc.sentences:
        out[sent.tag_set] = out.get(sent.tag_set, 0) + 1
    return out


def summarize(doc: Document, n_categories: int = N_CATEGORIES) -> DocumentSummary:
    """Per-category counts plus their proportion of the sentence total."""
    freq = tag_frequencies(doc, n_categories)
    total = len(doc.sentences)
    per_category = tuple(
        (cid, count, count / total if total else 0.0)
        for cid, count in sorted(freq.items())
    )
    return DocumentSummary(doc.id, total, per_category)


def agreement(
    a: Document, b: Document, n_categories: int = N_CATEGORIES
) -> AgreementReport:
    """Compare two annotations of the same text.

    Per sentence: Jaccard overlap of the two tag sets. Per category:
    the fraction of sentences on which both annotators agree about its
    presence or absence. Sentences are paired by id; the id sets must match.
    """
    by_id_a = {s.id: s for s in a.sentences}
    by_id_b = {s.id: s for s in b.sentences}
    if set(by_id_a) != set(by_id_b):
        only_a = sorted(set(by_id_a) - set(by_id_b))[:5]
        only_b = sorted(set(by_id_b) - set(by_id_a))[:5]
        raise SentenceMismatch(
            f"sentence id sets differ (only in first: {only_a}, only in second: {only_b})"
        )

    per_sentence = []
    category_hits = dict.fromkeys(range(1, n_categories + 1), 0)
    for sent in a.sentences:
        tags_a = sent.tag_set
        tags_b = by_id_b[sent.id].tag_set
        union = tags_a | tags_b
        jaccard = len(tags_a & tags_b) / len(union) if union else 1.0
        per_sentence.append((sent.id, jaccard))
        for cid in category_hits:
            if (cid in tags_a) == (cid in tags_b):
                category_hits[cid] += 1

    n = len(per_sentence)
    mean = sum(v for _, v in per_sentence) / n if n else 1.0
    per_category = tuple(
        (cid, hits / n if n else 1.0) for cid, hits in sorted(category_hits.items())
    )
    return AgreementReport(tuple(per_sentence), mean, per_category)
