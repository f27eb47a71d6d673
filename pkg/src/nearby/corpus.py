"""Corpus data model: categories, sentences, documents, filtering.

A corpus is a fixed scheme of categories plus a list of documents, each an
ordered list of sentences carrying non-empty category tag sets. Values are
immutable after construction and all operations here are pure functions,
so they are safe to share across threads.

The on-disk format is canonical JSON: UTF-8, compact separators, keys in a
fixed order, tag arrays sorted ascending. ``parse_corpus`` and
``serialize_corpus`` round-trip bit-exactly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

__all__ = [
    "Category",
    "Sentence",
    "Document",
    "Corpus",
    "FilterSpec",
    "ValidationIssue",
    "DocumentStats",
    "ValidationReport",
    "MalformedInput",
    "ValidationError",
    "UnknownCategory",
    "DEFAULT_CATEGORIES",
    "DEFAULT_CATEGORY_IDS",
    "category_by_key",
    "category_by_id",
    "resolve_category_refs",
    "parse_corpus",
    "serialize_corpus",
    "validate",
    "apply_filter",
]


class MalformedInput(Exception):
    """Raised when corpus bytes are not valid JSON of the expected shape."""


class UnknownCategory(Exception):
    """Raised when a category reference does not resolve to the registry."""


class ValidationError(Exception):
    """Raised when a structurally well-formed corpus violates an invariant.

    Carries the full list of issues; the message names the first offending
    sentence and rule.
    """

    def __init__(self, issues: list[ValidationIssue]):
        self.issues = issues
        first = issues[0]
        where = first.sentence_id or first.document_id or "corpus"
        super().__init__(f"{first.rule} ({where}): {first.message}")


@dataclass(frozen=True)
class Category:
    """One entry of the tagging scheme: stable id, short key, label, color."""

    id: int
    key: str
    label: str
    color: str


@dataclass(frozen=True)
class Sentence:
    """An ordered text unit with a tag set.

    ``tags`` is normalized to a sorted, de-duplicated tuple of category ids.
    ``source_index`` is the position in the document the sentence originally
    came from; it equals ``index`` unless the document has been filtered.
    """

    id: str
    index: int
    text: str
    tags: tuple[int, ...]
    source_index: int = -1

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(sorted(set(self.tags))))
        if self.source_index < 0:
            object.__setattr__(self, "source_index", self.index)

    @property
    def tag_set(self) -> frozenset[int]:
        return frozenset(self.tags)


@dataclass(frozen=True)
class Document:
    """An ordered sequence of sentences under a stable id."""

    id: str
    title: str
    sentences: tuple[Sentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))

    def __len__(self) -> int:
        return len(self.sentences)

    def sentence(self, sentence_id: str) -> Sentence | None:
        for s in self.sentences:
            if s.id == sentence_id:
                return s
        return None


@dataclass(frozen=True)
class Corpus:
    """A category registry plus documents tagged against it."""

    schema_version: int
    categories: tuple[Category, ...]
    documents: tuple[Document, ...]

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "documents", tuple(self.documents))

    @property
    def category_ids(self) -> frozenset[int]:
        return frozenset(c.id for c in self.categories)

    def document(self, document_id: str) -> Document | None:
        for d in self.documents:
            if d.id == document_id:
                return d
        return None


# The default 17-category registry. Colors are a fixed palette of visually
# distinct hues (one per category, gray reserved for the final catch-all
# category); they are configuration, not a contract.
DEFAULT_CATEGORIES: tuple[Category, ...] = (
    Category(1, "romantic", "Romantic", "#e6194b"),
    Category(2, "classical", "Classical", "#4363d8"),
    Category(3, "empirical", "Empirical", "#f58231"),
    Category(4, "inductive", "Inductive", "#3cb44b"),
    Category(5, "deductive", "Deductive", "#911eb4"),
    Category(6, "rational", "Rational or Speculative", "#42d4f4"),
    Category(7, "methodological", "Methodological", "#f032e6"),
    Category(8, "historical", "Historical or Descriptive", "#bfef45"),
    Category(9, "philosophical", "Philosophical", "#9a6324"),
    Category(10, "analogical", "Analogical", "#469990"),
    Category(11, "metaphorical", "Metaphorical or Visual", "#dcbeff"),
    Category(12, "agency", "Agency metaphor", "#800000"),
    Category(13, "classificatory", "Classificatory", "#808000"),
    Category(14, "numerical", "Numerical", "#000075"),
    Category(15, "future", "Future or Utility", "#aaffc3"),
    Category(16, "goals", "Research goals", "#fabed4"),
    Category(17, "blank", "Blank", "#a9a9a9"),
)

DEFAULT_CATEGORY_IDS: frozenset[int] = frozenset(c.id for c in DEFAULT_CATEGORIES)

_KEY_TO_CATEGORY = {c.key: c for c in DEFAULT_CATEGORIES}
_ID_TO_CATEGORY = {c.id: c for c in DEFAULT_CATEGORIES}


def category_by_key(key: str) -> Category:
    try:
        return _KEY_TO_CATEGORY[key]
    except KeyError:
        raise UnknownCategory(f"no category with key {key!r}") from None


def category_by_id(category_id: int) -> Category:
    try:
        return _ID_TO_CATEGORY[category_id]
    except KeyError:
        raise UnknownCategory(f"no category with id {category_id}") from None


def resolve_category_refs(
    refs: "list[int | str] | tuple[int | str, ...]",
    categories: tuple[Category, ...] = DEFAULT_CATEGORIES,
) -> frozenset[int]:
    """Resolve a mixed list of category ids and keys to a set of ids."""
    by_key = {c.key: c.id for c in categories}
    ids = {c.id for c in categories}
    out = set()
    for ref in refs:
        if isinstance(ref, bool):
            raise UnknownCategory(f"invalid category reference {ref!r}")
        if isinstance(ref, int):
            if ref not in ids:
                raise UnknownCategory(f"no category with id {ref}")
            out.add(ref)
        elif isinstance(ref, str):
            ref = ref.strip().lower()
            if ref.isdigit() and int(ref) in ids:
                out.add(int(ref))
            elif ref in by_key:
                out.add(by_key[ref])
            else:
                raise UnknownCategory(f"no category with key {ref!r}")
        else:
            raise UnknownCategory(f"invalid category reference {ref!r}")
    return frozenset(out)


@dataclass(frozen=True)
class FilterSpec:
    """Which sentences and tags to keep when deriving a document view.

    ``sentence_range`` is a half-open [start, end) interval over sentence
    indices, applied before tag exclusion. ``exclude_categories`` and
    ``include_only_categories`` must be disjoint when both are given.
    """

    exclude_categories: frozenset[int] = frozenset()
    include_only_categories: frozenset[int] | None = None
    sentence_range: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "exclude_categories", frozenset(self.exclude_categories)
        )
        if self.include_only_categories is not None:
            object.__setattr__(
                self,
                "include_only_categories",
                frozenset(self.include_only_categories),
            )
            overlap = self.exclude_categories & self.include_only_categories
            if overlap:
                raise ValueError(
                    f"exclude and include_only overlap on ids {sorted(overlap)}"
                )
        if self.sentence_range is not None:
            start, end = self.sentence_range
            if start < 0 or end < start:
                raise ValueError(f"bad sentence range [{start}, {end})")
            object.__setattr__(self, "sentence_range", (int(start), int(end)))

    @property
    def is_empty(self) -> bool:
        return (
            not self.exclude_categories
            and self.include_only_categories is None
            and self.sentence_range is None
        )

    def referenced_ids(self) -> frozenset[int]:
        refs = set(self.exclude_categories)
        if self.include_only_categories is not None:
            refs |= self.include_only_categories
        return frozenset(refs)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

# Rule names are stable strings used in reports and error messages.
RULE_EMPTY_TAGS = "empty-tags"
RULE_UNKNOWN_CATEGORY = "unknown-category"
RULE_DUPLICATE_SENTENCE_ID = "duplicate-sentence-id"
RULE_NON_CONTIGUOUS_INDEX = "non-contiguous-index"
RULE_DUPLICATE_TAG = "duplicate-tag"
RULE_BAD_REGISTRY = "bad-category-registry"
RULE_EXCESS_TAGS = "excess-tags"

# Tag sets larger than this are reported as warnings, not errors.
TAG_COUNT_WARN_THRESHOLD = 5

_COLOR_RE = re.compile(r"^#[0-9a-fA-F]{6}$")


@dataclass(frozen=True)
class ValidationIssue:
    rule: str
    message: str
    document_id: str | None = None
    sentence_id: str | None = None

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "message": self.message,
            "document_id": self.document_id,
            "sentence_id": self.sentence_id,
        }


@dataclass(frozen=True)
class DocumentStats:
    document_id: str
    sentence_count: int
    mean_tags: float
    min_tags: int
    max_tags: int

    def to_json(self) -> dict:
        return {
            "document_id": self.document_id,
            "sentence_count": self.sentence_count,
            "mean_tags": self.mean_tags,
            "min_tags": self.min_tags,
            "max_tags": self.max_tags,
        }


@dataclass
class ValidationReport:
    errors: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)
    stats: list[DocumentStats] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "errors": [e.to_json() for e in self.errors],
            "warnings": [w.to_json() for w in self.warnings],
            "stats": [s.to_json() for s in self.stats],
        }


def validate(corpus: Corpus) -> ValidationReport:
    """Check every corpus invariant and compute per-document tag statistics.

    Findings are returned, never raised: errors for empty tag sets, unknown
    category ids, duplicate sentence ids, and non-contiguous indices;
    a warning for any sentence tagged with more than five categories.
    """
    report = ValidationReport()

    seen_ids, seen_keys = set(), set()
    for cat in corpus.categories:
        if cat.id in seen_ids:
            report.errors.append(
                ValidationIssue(RULE_BAD_REGISTRY, f"duplicate category id {cat.id}")
            )
        if cat.key in seen_keys:
            report.errors.append(
                ValidationIssue(RULE_BAD_REGISTRY, f"duplicate category key {cat.key!r}")
            )
        if cat.key != cat.key.lower() or any(ch.isspace() for ch in cat.key):
            report.errors.append(
                ValidationIssue(
                    RULE_BAD_REGISTRY,
                    f"category key {cat.key!r} must be lowercase without whitespace",
                )
            )
        if not _COLOR_RE.match(cat.color):
            report.errors.append(
                ValidationIssue(
                    RULE_BAD_REGISTRY, f"category color {cat.color!r} is not #RRGGBB"
                )
            )
        seen_ids.add(cat.id)
        seen_keys.add(cat.key)
    if corpus.categories and sorted(seen_ids) != list(range(1, len(seen_ids) + 1)):
        report.errors.append(
            ValidationIssue(
                RULE_BAD_REGISTRY,
                f"category ids {sorted(seen_ids)} do not form a contiguous range from 1",
            )
        )

    known = corpus.category_ids
    for doc in corpus.documents:
        seen_sentence_ids: set[str] = set()
        tag_counts: list[int] = []
        for pos, sent in enumerate(doc.sentences):
            if sent.id in seen_sentence_ids:
                report.errors.append(
                    ValidationIssue(
                        RULE_DUPLICATE_SENTENCE_ID,
                        f"sentence id {sent.id!r} occurs more than once",
                        doc.id,
                        sent.id,
                    )
                )
            seen_sentence_ids.add(sent.id)
            if sent.index != pos:
                report.errors.append(
                    ValidationIssue(
                        RULE_NON_CONTIGUOUS_INDEX,
                        f"sentence at position {pos} has index {sent.index}",
                        doc.id,
                        sent.id,
                    )
                )
            if not sent.tags:
                report.errors.append(
                    ValidationIssue(
                        RULE_EMPTY_TAGS,
                        "sentence carries no tags (minimum is 1)",
                        doc.id,
                        sent.id,
                    )
                )
            unknown = [t for t in sent.tags if t not in known]
            if unknown:
                report.errors.append(
                    ValidationIssue(
                        RULE_UNKNOWN_CATEGORY,
                        f"tag ids {unknown} are not in the category registry",
                        doc.id,
                        sent.id,
                    )
                )
            if len(sent.tags) > TAG_COUNT_WARN_THRESHOLD:
                report.warnings.append(
                    ValidationIssue(
                        RULE_EXCESS_TAGS,
                        f"sentence carries {len(sent.tags)} tags "
                        f"(more than {TAG_COUNT_WARN_THRESHOLD} is unusual)",
                        doc.id,
                        sent.id,
                    )
                )
            tag_counts.append(len(sent.tags))

        if tag_counts:
            stats = DocumentStats(
                doc.id,
                len(tag_counts),
                sum(tag_counts) / len(tag_counts),
                min(tag_counts),
                max(tag_counts),
            )
        else:
            stats = DocumentStats(doc.id, 0, 0.0, 0, 0)
        report.stats.append(stats)

    return report


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise MalformedInput(message)


def parse_corpus(data: "bytes | str") -> Corpus:
    """Parse canonical corpus JSON into a validated :class:`Corpus`.

    Raises :class:`MalformedInput` for bad JSON or schema shape and
    :class:`ValidationError` when the parsed corpus violates an invariant.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"corpus is not valid UTF-8: {exc}") from exc
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"corpus is not valid JSON: {exc}") from exc

    _expect(isinstance(raw, dict), "top level must be an object")
    _expect(isinstance(raw.get("schema_version"), int), "schema_version must be an integer")
    _expect(isinstance(raw.get("categories"), list), "categories must be a list")
    _expect(isinstance(raw.get("documents"), list), "documents must be a list")

    categories = []
    for c in raw["categories"]:
        _expect(isinstance(c, dict), "category entries must be objects")
        _expect(isinstance(c.get("id"), int), "category id must be an integer")
        for k in ("key", "label", "color"):
            _expect(isinstance(c.get(k), str), f"category {k} must be a string")
        categories.append(Category(c["id"], c["key"], c["label"], c["color"]))

    duplicate_tag_issues: list[ValidationIssue] = []
    documents = []
    for d in raw["documents"]:
        _expect(isinstance(d, dict), "document entries must be objects")
        _expect(isinstance(d.get("id"), str), "document id must be a string")
        _expect(isinstance(d.get("title"), str), "document title must be a string")
        _expect(isinstance(d.get("sentences"), list), "document sentences must be a list")
        sentences = []
        for s in d["sentences"]:
            _expect(isinstance(s, dict), "sentence entries must be objects")
            _expect(isinstance(s.get("id"), str), "sentence id must be a string")
            _expect(isinstance(s.get("index"), int), "sentence index must be an integer")
            _expect(isinstance(s.get("text"), str), "sentence text must be a string")
            tags = s.get("tags")
            _expect(
                isinstance(tags, list)
                and all(isinstance(t, int) and not isinstance(t, bool) for t in tags),
                "sentence tags must be a list of integers",
            )
            if len(set(tags)) != len(tags):
                duplicate_tag_issues.append(
                    ValidationIssue(
                        RULE_DUPLICATE_TAG,
                        f"tag list {tags} contains duplicates",
                        d["id"],
                        s["id"],
                    )
                )
            sentences.append(Sentence(s["id"], s["index"], s["text"], tuple(tags)))
        documents.append(Document(d["id"], d["title"], tuple(sentences)))

    corpus = Corpus(raw["schema_version"], tuple(categories), tuple(documents))
    report = validate(corpus)
    issues = duplicate_tag_issues + report.errors
    if issues:
        raise ValidationError(issues)
    return corpus


def serialize_corpus(corpus: Corpus) -> bytes:
    """Serialize to canonical JSON bytes (fixed key order, sorted tags)."""
    payload = {
        "schema_version": corpus.schema_version,
        "categories": [
            {"id": c.id, "key": c.key, "label": c.label, "color": c.color}
            for c in corpus.categories
        ],
        "documents": [
            {
                "id": d.id,
                "title": d.title,
                "sentences": [
                    {
                        "id": s.id,
                        "index": s.index,
                        "text": s.text,
                        "tags": list(s.tags),
                    }
                    for s in d.sentences
                ],
            }
            for d in corpus.documents
        ],
    }
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------


def apply_filter(
    doc: Document,
    spec: FilterSpec,
    known_ids: frozenset[int] = DEFAULT_CATEGORY_IDS,
) -> Document:
    """Derive a filtered view of a document.

    In order: restrict to the sentence range, strip excluded categories
    (and everything outside ``include_only_categories`` when given), drop
    sentences whose tag sets become empty, and re-index the survivors
    contiguously. Sentence ids are kept and ``source_index`` preserves each
    sentence's position in the original document.

    Idempotent: applying the same spec twice equals applying it once.
    """
    unknown = spec.referenced_ids() - known_ids
    if unknown:
        raise UnknownCategory(f"filter references unknown category ids {sorted(unknown)}")

    sentences = doc.sentences
    if spec.sentence_range is not None:
        # Ranges address original reading-order positions (source_index), so
        # re-applying the same spec to an already-filtered view is a no-op.
        # On an unfiltered document source_index equals index.
        start, end = spec.sentence_range
        sentences = tuple(s for s in sentences if start <= s.source_index < end)

    kept: list[Sentence] = []
    for sent in sentences:
        tags = [t for t in sent.tags if t not in spec.exclude_categories]
        if spec.include_only_categories is not None:
            tags = [t for t in tags if t in spec.include_only_categories]
        if not tags:
            continue
        kept.append(
            replace(
                sent,
                index=len(kept),
                tags=tuple(tags),
                source_index=sent.source_index,
            )
        )
    return Document(doc.id, doc.title, tuple(kept))
