"""HTTP API for the reading studio.

Serves one immutable corpus snapshot loaded at startup. All endpoints are
read-only and idempotent, and every layout is deterministic for a fixed
request, so responses are byte-identical whether they come from the
in-memory cache or a recomputation. Stateless per request: two clients (or
two panels of one client) can ask for different documents and filters with
no interference.

Routes:
    GET  /healthz
    GET  /api/texts
    GET  /api/texts/{id}/summary?exclude=...&include_only=...&range=a:b
    GET  /api/texts/{id}/sentences/{sid}
    POST /api/texts/{id}/layout
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import analytics, embedding, layout as layout_mod
from .corpus import (
    Corpus,
    Document,
    FilterSpec,
    UnknownCategory,
    apply_filter,
    parse_corpus,
    resolve_category_refs,
    validate,
)

__all__ = [
    "ApiError",
    "create_app",
    "load_corpus",
    "compute_layout",
    "compute_layout_bytes",
]

VIEWS = ("graph", "matrix", "waffle")


class ApiError(Exception):
    """An error with a uniform JSON envelope {code, message, detail}."""

    def __init__(self, status: int, code: str, message: str, detail: object = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.status,
            content={"code": self.code, "message": self.message, "detail": self.detail},
        )


def load_corpus(path: "str | Path") -> Corpus:
    """Read and validate a corpus file; lets parse errors propagate."""
    return parse_corpus(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# Request normalization
# ---------------------------------------------------------------------------


def _bad_config(message: str, detail: object = None) -> ApiError:
    return ApiError(422, "invalid-config", message, detail)


def _require_keys(obj: dict, allowed: tuple[str, ...], where: str) -> None:
    unknown = set(obj) - set(allowed)
    if unknown:
        raise _bad_config(f"unknown {where} keys {sorted(unknown)}")


def _number(obj: dict, key: str, default: float, where: str) -> float:
    value = obj.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _bad_config(f"{where}.{key} must be a number")
    return float(value)


def _integer(obj: dict, key: str, default: int, where: str) -> int:
    value = obj.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise _bad_config(f"{where}.{key} must be an integer")
    return int(value)


def _parse_filter(raw: object, corpus: Corpus) -> tuple[FilterSpec, dict]:
    """Build a FilterSpec from a request and return its canonical form."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise _bad_config("filter must be an object")
    _require_keys(raw, ("exclude", "include_only", "range"), "filter")

    def refs(key: str) -> "frozenset[int] | None":
        value = raw.get(key)
        if value is None:
            return None
        if not isinstance(value, list):
            raise _bad_config(f"filter.{key} must be a list of category ids or keys")
        try:
            return resolve_category_refs(value, corpus.categories)
        except UnknownCategory as exc:
            raise ApiError(422, "unknown-category", str(exc)) from exc

    exclude = refs("exclude") or frozenset()
    include_only = refs("include_only")

    rng = raw.get("range")
    sentence_range = None
    if rng is not None:
        if (
            not isinstance(rng, list)
            or len(rng) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in rng)
        ):
            raise _bad_config("filter.range must be [start, end]")
        sentence_range = (rng[0], rng[1])

    try:
        spec = FilterSpec(exclude, include_only, sentence_range)
    except ValueError as exc:
        raise _bad_config(str(exc)) from exc

    canonical = {
        "exclude": sorted(spec.exclude_categories),
        "include_only": sorted(spec.include_only_categories)
        if spec.include_only_categories is not None
        else None,
        "range": list(spec.sentence_range) if spec.sentence_range else None,
    }
    return spec, canonical


def _parse_embedding_config(raw: object, master_seed: int) -> embedding.EmbeddingConfig:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise _bad_config("embedding must be an object")
    allowed = (
        "perplexity",
        "iterations",
        "learning_rate",
        "momentum_start",
        "momentum_final",
        "momentum_switch_iter",
        "early_exaggeration",
        "exaggeration_iters",
        "seed",
        "metric",
    )
    _require_keys(raw, allowed, "embedding")
    metric = raw.get("metric", "euclidean")
    if not isinstance(metric, str):
        raise _bad_config("embedding.metric must be a string")
    try:
        return embedding.EmbeddingConfig(
            perplexity=_number(raw, "perplexity", 30.0, "embedding"),
            iterations=_integer(raw, "iterations", 1000, "embedding"),
            learning_rate=_number(raw, "learning_rate", 200.0, "embedding"),
            momentum_start=_number(raw, "momentum_start", 0.5, "embedding"),
            momentum_final=_number(raw, "momentum_final", 0.8, "embedding"),
            momentum_switch_iter=_integer(raw, "momentum_switch_iter", 250, "embedding"),
            early_exaggeration=_number(raw, "early_exaggeration", 12.0, "embedding"),
            exaggeration_iters=_integer(raw, "exaggeration_iters", 250, "embedding"),
            seed=_integer(raw, "seed", master_seed, "embedding"),
            metric=metric,
        )
    except embedding.ConfigError as exc:
        raise _bad_config(str(exc)) from exc


def _parse_graph_params(raw: dict, master_seed: int) -> layout_mod.GraphParams:
    allowed = (
        "ring_radius",
        "padding",
        "anchor_strength",
        "max_iterations",
        "convergence_epsilon",
        "edge_strategy",
        "canvas",
    )
    _require_keys(raw, allowed, "layout")
    strategy = raw.get("edge_strategy", "mst")
    if strategy not in ("mst", "complete"):
        raise _bad_config(f"unknown edge strategy {strategy!r}")
    eps = raw.get("convergence_epsilon")
    if eps is not None and (isinstance(eps, bool) or not isinstance(eps, (int, float))):
        raise _bad_config("layout.convergence_epsilon must be a number")
    params = layout_mod.GraphParams(
        ring_radius=_number(raw, "ring_radius", 8.0, "layout"),
        padding=_number(raw, "padding", 2.0, "layout"),
        anchor_strength=_number(raw, "anchor_strength", 0.1, "layout"),
        max_iterations=_integer(raw, "max_iterations", 500, "layout"),
        convergence_epsilon=float(eps) if eps is not None else None,
        edge_strategy=strategy,
        canvas=_number(raw, "canvas", 1000.0, "layout"),
        # Derived sub-seed: keeps the glyph fan-out independent of the
        # embedding stream while still a pure function of the request seed.
        seed=master_seed + 1,
    )
    if params.ring_radius <= 0 or params.canvas <= 0:
        raise _bad_config("ring_radius and canvas must be positive")
    return params


def _parse_waffle_params(raw: dict) -> layout_mod.WaffleConfig:
    _require_keys(raw, ("cell_size", "row_width", "gutter"), "layout")
    try:
        return layout_mod.WaffleConfig(
            cell_size=_number(raw, "cell_size", 14.0, "layout"),
            row_width=_number(raw, "row_width", 980.0, "layout"),
            gutter=_number(raw, "gutter", 4.0, "layout"),
        )
    except layout_mod.LayoutConfigError as exc:
        raise _bad_config(str(exc)) from exc


def _parse_matrix_params(raw: dict) -> tuple[str, str]:
    _require_keys(raw, ("normalization", "order"), "layout")
    normalization = raw.get("normalization", "raw-max")
    order = raw.get("order", "id")
    if normalization not in layout_mod.NORMALIZATIONS:
        raise _bad_config(f"unknown normalization {normalization!r}")
    if order not in layout_mod.MATRIX_ORDERS:
        raise _bad_config(f"unknown matrix order {order!r}")
    return normalization, order


def _canonical_params(params: object) -> dict:
    from dataclasses import asdict, is_dataclass

    if is_dataclass(params):
        return asdict(params)
    return dict(params)  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# Layout computation
# ---------------------------------------------------------------------------


def compute_layout(corpus: Corpus, document_id: str, body: dict) -> tuple[object, dict]:
    """Resolve a layout request against the corpus.

    Returns the layout object (GraphLayout, WaffleLayout, or MatrixLayout)
    and its JSON payload. Raises :class:`ApiError` for unknown documents and
    invalid requests. The canonical resolved request is embedded under
    ``"request"`` so a payload is self-describing.
    """
    doc = corpus.document(document_id)
    if doc is None:
        raise ApiError(404, "unknown-document", f"no document {document_id!r}")

    if not isinstance(body, dict):
        raise _bad_config("request body must be an object")
    _require_keys(body, ("view", "filter", "embedding", "layout", "seed"), "request")
    view = body.get("view")
    if view not in VIEWS:
        raise _bad_config(f"view must be one of {list(VIEWS)}, got {view!r}")
    seed = body.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise _bad_config("seed must be an integer")

    spec, canonical_filter = _parse_filter(body.get("filter"), corpus)
    raw_layout = body.get("layout") or {}
    if not isinstance(raw_layout, dict):
        raise _bad_config("layout must be an object")

    try:
        filtered = apply_filter(doc, spec, corpus.category_ids)
    except UnknownCategory as exc:
        raise ApiError(422, "unknown-category", str(exc)) from exc

    canonical: dict = {
        "document_id": document_id,
        "view": view,
        "filter": canonical_filter,
        "seed": seed,
    }

    if view == "graph":
        config = _parse_embedding_config(body.get("embedding"), seed)
        params = _parse_graph_params(raw_layout, seed)
        canonical["embedding"] = config.to_json()
        canonical["layout"] = _canonical_params(params)
        try:
            result = embedding.tsne_embed(embedding.vectorize(filtered), config)
            layout_obj: object = layout_mod.graph_layout(
                filtered, result.positions, params
            )
        except (embedding.ConfigError, layout_mod.LayoutConfigError) as exc:
            raise _bad_config(str(exc)) from exc
        payload = layout_obj.to_json()
        payload["embedding"] = {
            "kl_trace": [float(v) for v in result.kl_trace],
            "n_points": result.n_points,
            "n_distinct": result.n_distinct,
            "effective_perplexity": result.effective_perplexity,
        }
    elif view == "waffle":
        if body.get("embedding"):
            raise _bad_config("embedding config only applies to the graph view")
        config = _parse_waffle_params(raw_layout)
        canonical["embedding"] = None
        canonical["layout"] = _canonical_params(config)
        try:
            layout_obj = layout_mod.waffle_layout(filtered, config)
        except layout_mod.LayoutConfigError as exc:
            raise _bad_config(str(exc)) from exc
        payload = layout_obj.to_json()
    else:
        if body.get("embedding"):
            raise _bad_config("embedding config only applies to the graph view")
        normalization, order = _parse_matrix_params(raw_layout)
        canonical["embedding"] = None
        canonical["layout"] = {"normalization": normalization, "order": order}
        matrix = analytics.cooccurrence(filtered, len(corpus.categories))
        layout_obj = layout_mod.matrix_layout(matrix, normalization, order)
        payload = layout_obj.to_json()

    payload["document_id"] = document_id
    payload["sentence_count"] = len(filtered.sentences)
    payload["request"] = canonical
    return layout_obj, payload


def compute_layout_bytes(corpus: Corpus, document_id: str, body: dict) -> bytes:
    """JSON bytes for a layout request; identical requests yield identical bytes."""
    _, payload = compute_layout(corpus, document_id, body)
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def canonical_cache_key(document_id: str, body: dict) -> str:
    """Hash of the raw request; distinct spellings of the same resolved
    request may recompute, which is harmless because results are identical."""
    raw = json.dumps(
        {"document_id": document_id, "body": body},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------


def _parse_query_filter(
    corpus: Corpus,
    exclude: "str | None",
    include_only: "str | None",
    range_: "str | None",
) -> FilterSpec:
    def refs(value: "str | None") -> "frozenset[int] | None":
        if value is None or value == "":
            return None
        parts = [p for p in value.split(",") if p.strip()]
        try:
            return resolve_category_refs(parts, corpus.categories)
        except UnknownCategory as exc:
            raise ApiError(422, "unknown-category", str(exc)) from exc

    sentence_range = None
    if range_:
        try:
            start, end = range_.split(":")
            sentence_range = (int(start), int(end))
        except ValueError as exc:
            raise _bad_config(f"range must look like start:end, got {range_!r}") from exc
    try:
        return FilterSpec(refs(exclude) or frozenset(), refs(include_only), sentence_range)
    except ValueError as exc:
        raise _bad_config(str(exc)) from exc


def create_app(corpus: Corpus, static_dir: "str | Path | None" = None) -> FastAPI:
    """Build the API app around an immutable corpus snapshot."""
    report = validate(corpus)
    if not report.ok:
        raise ValueError(f"refusing to serve an invalid corpus: {report.errors[0].message}")
    stats_by_doc = {s.document_id: s for s in report.stats}

    app = FastAPI(title="nearby", openapi_url=None)
    cache: dict[str, bytes] = {}
    cache_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return exc.response()

    def get_document(document_id: str) -> Document:
        doc = corpus.document(document_id)
        if doc is None:
            raise ApiError(404, "unknown-document", f"no document {document_id!r}")
        return doc

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.get("/api/texts")
    def list_texts() -> dict:
        return {
            "schema_version": corpus.schema_version,
            "categories": [
                {"id": c.id, "key": c.key, "label": c.label, "color": c.color}
                for c in corpus.categories
            ],
            "texts": [
                {
                    "id": d.id,
                    "title": d.title,
                    "sentence_count": stats_by_doc[d.id].sentence_count,
                    "mean_tags": stats_by_doc[d.id].mean_tags,
                    "min_tags": stats_by_doc[d.id].min_tags,
                    "max_tags": stats_by_doc[d.id].max_tags,
                }
                for d in corpus.documents
            ],
        }

    @app.get("/api/texts/{document_id}/summary")
    def summary(
        document_id: str,
        exclude: "str | None" = None,
        include_only: "str | None" = None,
        range: "str | None" = None,  # noqa: A002 - query parameter name
    ) -> dict:
        doc = get_document(document_id)
        spec = _parse_query_filter(corpus, exclude, include_only, range)
        try:
            filtered = apply_filter(doc, spec, corpus.category_ids)
        except UnknownCategory as exc:
            raise ApiError(422, "unknown-category", str(exc)) from exc
        return analytics.summarize(filtered, len(corpus.categories)).to_json()

    @app.get("/api/texts/{document_id}/sentences/{sentence_id}")
    def sentence(document_id: str, sentence_id: str) -> dict:
        doc = get_document(document_id)
        sent = doc.sentence(sentence_id)
        if sent is None:
            raise ApiError(404, "unknown-sentence", f"no sentence {sentence_id!r}")
        # Combination counts always refer to the unfiltered document.
        count = analytics.combination_count(
            doc, sent.tag_set, known_ids=corpus.category_ids
        )
        return {
            "document_id": document_id,
            "sentence_id": sent.id,
            "index": sent.index,
            "text": sent.text,
            "tags": list(sent.tags),
            "combination_count": count,
        }

    @app.post("/api/texts/{document_id}/layout")
    async def layout_endpoint(document_id: str, request: Request) -> Response:
        raw = await request.body()
        try:
            body = json.loads(raw) if raw else {}
        except json.JSONDecodeError as exc:
            raise ApiError(400, "malformed-body", f"body is not valid JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise ApiError(400, "malformed-body", "body must be a JSON object")

        key = canonical_cache_key(document_id, body)
        with cache_lock:
            payload = cache.get(key)
        if payload is None:
            payload = compute_layout_bytes(corpus, document_id, body)
            with cache_lock:
                # Concurrent misses may both compute; results are identical
                # by determinism, so last write wins.
                cache[key] = payload
        return Response(content=payload, media_type="application/json")

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="studio")

    return app
