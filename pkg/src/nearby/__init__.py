"""Analytics engine and reading studio for multi-tagged sentence corpora.

Computes tag statistics, co-occurrence, 2D embeddings with overlap-free
glyph layouts, waffle and matrix geometries, and serves them over HTTP for
side-by-side comparative reading of texts.
"""

from .corpus import (
    Category,
    Corpus,
    DEFAULT_CATEGORIES,
    Document,
    FilterSpec,
    MalformedInput,
    Sentence,
    UnknownCategory,
    ValidationError,
    apply_filter,
    parse_corpus,
    serialize_corpus,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Category",
    "Corpus",
    "DEFAULT_CATEGORIES",
    "Document",
    "FilterSpec",
    "MalformedInput",
    "Sentence",
    "UnknownCategory",
    "ValidationError",
    "apply_filter",
    "parse_corpus",
    "serialize_corpus",
    "validate",
    "__version__",
]
