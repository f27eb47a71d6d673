from __future__ import annotations

import numpy as np
import pytest

from nearby.corpus import Document, Sentence
from nearby.synth import SynthSpec, generate_corpus


def make_doc(tag_sets, doc_id="doc", title="Test document"):
    """Build a document from a list of tag-id tuples."""
    sentences = tuple(
        Sentence(f"{doc_id}-s{i:04d}", i, f"Sentence {i}.", tuple(tags))
        for i, tags in enumerate(tag_sets)
    )
    return Document(doc_id, title, sentences)


def random_doc(rng: np.random.Generator, n_sentences: int, doc_id="rand", max_tags=5):
    """A random valid document with 1..max_tags tags per sentence."""
    tag_sets = []
    for _ in range(n_sentences):
        k = int(rng.integers(1, max_tags + 1))
        tags = rng.choice(17, size=k, replace=False) + 1
        tag_sets.append(tuple(int(t) for t in tags))
    return make_doc(tag_sets, doc_id=doc_id)


@pytest.fixture(scope="session")
def synth_corpus():
    return generate_corpus(SynthSpec())


@pytest.fixture(scope="session")
def small_corpus():
    """Default categories, two small documents; fast to recompute layouts."""
    rng = np.random.default_rng(7)
    from nearby.corpus import Corpus, DEFAULT_CATEGORIES

    docs = (
        random_doc(rng, 30, doc_id="alpha"),
        random_doc(rng, 45, doc_id="beta"),
    )
    return Corpus(1, DEFAULT_CATEGORIES, docs)
