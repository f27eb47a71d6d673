"""Synthetic corpus generation.

The original tagged texts are not redistributable, so tests and demos run
against a schema-compatible synthetic corpus: same category scheme, same
document sizes (382, 374, 800, 79 sentences), and a tag-count distribution
matching the reported statistics (1 to 5 tags per sentence, mean 3).

Generation is fully deterministic for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import DEFAULT_CATEGORIES, Corpus, Document, Sentence

__all__ = ["SynthSpec", "generate_corpus", "DEFAULT_DOCUMENTS"]

# (id, title, sentence count) for the default four-document fixture.
DEFAULT_DOCUMENTS: tuple[tuple[str, str, int], ...] = (
    ("goethe", "Metamorphosis (synthetic)", 382),
    ("dc1", "Medical Properties (synthetic)", 374),
    ("dc2", "Botanical Geography (synthetic)", 800),
    ("dc3", "Organography (synthetic)", 79),
)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the generator.

    Tag counts are drawn as ``min_tags + Binomial(max_tags - min_tags, p)``
    with ``p`` chosen so the expected count equals ``mean_tags``.
    """

    documents: tuple[tuple[str, str, int], ...] = DEFAULT_DOCUMENTS
    mean_tags: float = 3.0
    min_tags: int = 1
    max_tags: int = 5
    seed: int = 1837

    def __post_init__(self):
        n_categories = len(DEFAULT_CATEGORIES)
        if not self.documents or any(count <= 0 for _, _, count in self.documents):
            raise ValueError("document sentence counts must be positive")
        if not 1 <= self.min_tags <= self.max_tags <= n_categories:
            raise ValueError(
                f"need 1 <= min_tags <= max_tags <= {n_categories}, "
                f"got [{self.min_tags}, {self.max_tags}]"
            )
        if not self.min_tags <= self.mean_tags <= self.max_tags:
            raise ValueError(
                f"mean_tags {self.mean_tags} outside [{self.min_tags}, {self.max_tags}]"
            )


def _tag_count_probability(spec: SynthSpec) -> float:
    span = spec.max_tags - spec.min_tags
    if span == 0:
        return 0.0
    return (spec.mean_tags - spec.min_tags) / span


def generate_corpus(spec: SynthSpec = SynthSpec()) -> Corpus:
    """Build a valid synthetic corpus from ``spec``, deterministically.

    Each document gets its own category-preference profile (a Dirichlet draw)
    so documents differ in tag composition the way distinct texts would; tag
    sets are sampled without replacement under those weights. Sentence texts
    are placeholders.
    """
    rng = np.random.Generator(np.random.Philox(spec.seed))
    n_categories = len(DEFAULT_CATEGORIES)
    p = _tag_count_probability(spec)
    span = spec.max_tags - spec.min_tags

    documents = []
    for doc_id, title, count in spec.documents:
        weights = rng.dirichlet(np.full(n_categories, 2.0))
        tag_counts = spec.min_tags + rng.binomial(span, p, size=count)
        sentences = []
        for i in range(count):
            tags = rng.choice(
                n_categories, size=int(tag_counts[i]), replace=False, p=weights
            )
            sentences.append(
                Sentence(
                    id=f"{doc_id}-s{i + 1:04d}",
                    index=i,
                    text=f"Synthetic sentence {i + 1} of {title}.",
                    tags=tuple(int(t) + 1 for t in tags),
                )
            )
        documents.append(Document(doc_id, title, tuple(sentences)))

    return Corpus(1, DEFAULT_CATEGORIES, tuple(documents))
