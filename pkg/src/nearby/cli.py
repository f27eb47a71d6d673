"""Command-line access to every pipeline stage.

Subcommands: validate | stats | export | agreement | synth | serve.
Exit codes are stable: 0 success, 1 validation failure, 2 usage error,
3 IO error. Every command can emit machine-readable output with
``--format json``; the default is a human table.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analytics, svg
from .corpus import (
    Corpus,
    MalformedInput,
    UnknownCategory,
    ValidationError,
    parse_corpus,
    serialize_corpus,
    validate,
)
from .synth import DEFAULT_DOCUMENTS, SynthSpec, generate_corpus

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_corpus(path: "str | None") -> Corpus:
    path = path or os.environ.get("NEARBY_CORPUS")
    if not path:
        raise CliError(EXIT_USAGE, "no corpus given (use --corpus or NEARBY_CORPUS)")
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read corpus {path!r}: {exc}") from exc
    try:
        return parse_corpus(data)
    except (MalformedInput, ValidationError) as exc:
        raise CliError(EXIT_VALIDATION, f"invalid corpus {path!r}: {exc}") from exc


def _write_output(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path!r}: {exc}") from exc


def _print_stats_table(stats) -> None:
    print(f"{'document':<12} {'sentences':>9} {'mean tags':>9} {'min':>4} {'max':>4}")
    for s in stats:
        print(
            f"{s.document_id:<12} {s.sentence_count:>9} {s.mean_tags:>9.2f} "
            f"{s.min_tags:>4} {s.max_tags:>4}"
        )


def cmd_validate(args: argparse.Namespace) -> int:
    path = args.corpus or os.environ.get("NEARBY_CORPUS")
    if not path:
        raise CliError(EXIT_USAGE, "no corpus given (use --corpus or NEARBY_CORPUS)")
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read corpus {path!r}: {exc}") from exc

    # Parse leniently so validation findings are reported, not raised.
    try:
        corpus = parse_corpus(data)
        report = validate(corpus)
    except ValidationError as exc:
        if args.format == "json":
            print(json.dumps({"ok": False, "errors": [i.to_json() for i in exc.issues]}))
        else:
            for issue in exc.issues:
                where = issue.sentence_id or issue.document_id or "corpus"
                print(f"ERROR {issue.rule} ({where}): {issue.message}")
        return EXIT_VALIDATION
    except MalformedInput as exc:
        raise CliError(EXIT_VALIDATION, f"invalid corpus {path!r}: {exc}") from exc

    if args.format == "json":
        print(json.dumps(report.to_json()))
    else:
        _print_stats_table(report.stats)
        for issue in report.warnings:
            where = issue.sentence_id or issue.document_id or "corpus"
            print(f"WARN {issue.rule} ({where}): {issue.message}")
        print("ok" if report.ok else "invalid")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_stats(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus)
    report = validate(corpus)
    if args.format == "json":
        print(json.dumps({"stats": [s.to_json() for s in report.stats]}))
    else:
        _print_stats_table(report.stats)
    return EXIT_OK


def _filter_body(args: argparse.Namespace) -> dict:
    body_filter: dict = {}
    if args.exclude:
        body_filter["exclude"] = [p for p in args.exclude.split(",") if p.strip()]
    if args.include_only:
        body_filter["include_only"] = [
            p for p in args.include_only.split(",") if p.strip()
        ]
    if args.range:
        try:
            start, end = args.range.split(":")
            body_filter["range"] = [int(start), int(end)]
        except ValueError as exc:
            raise CliError(EXIT_USAGE, f"--range must look like start:end, got {args.range!r}") from exc
    return body_filter


def cmd_export(args: argparse.Namespace) -> int:
    from .service import ApiError, compute_layout

    corpus = _load_corpus(args.corpus)
    document_id = args.document or (corpus.documents[0].id if corpus.documents else None)
    if not document_id:
        raise CliError(EXIT_USAGE, "corpus has no documents to export")

    layout_params: dict = {}
    if args.view == "matrix":
        layout_params["normalization"] = args.normalize
        layout_params["order"] = args.order
    if args.view == "graph":
        layout_params["edge_strategy"] = args.strategy

    body = {
        "view": args.view,
        "filter": _filter_body(args),
        "layout": layout_params,
        "seed": args.seed,
    }
    try:
        layout_obj, payload = compute_layout(corpus, document_id, body)
    except ApiError as exc:
        code = EXIT_USAGE if exc.status in (400, 422) else EXIT_VALIDATION
        raise CliError(code, exc.message) from exc

    if args.format == "json":
        data = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
        default_name = f"{document_id}-{args.view}.json"
    else:
        renderer = {
            "graph": svg.render_graph_svg,
            "matrix": svg.render_matrix_svg,
            "waffle": svg.render_waffle_svg,
        }[args.view]
        data = renderer(layout_obj, corpus.categories).encode("utf-8")
        default_name = f"{document_id}-{args.view}.svg"

    out = args.out or default_name
    _write_output(out, data)
    print(out)
    return EXIT_OK


def cmd_agreement(args: argparse.Namespace) -> int:
    corpus_a = _load_corpus(args.corpus_a)
    corpus_b = _load_corpus(args.corpus_b)

    if len(corpus_a.documents) == 1 and len(corpus_b.documents) == 1:
        pairs = [(corpus_a.documents[0], corpus_b.documents[0])]
    else:
        ids_a = {d.id for d in corpus_a.documents}
        ids_b = {d.id for d in corpus_b.documents}
        if ids_a != ids_b:
            raise CliError(EXIT_VALIDATION, "corpora do not contain the same documents")
        pairs = [(d, corpus_b.document(d.id)) for d in corpus_a.documents]

    reports = []
    try:
        for doc_a, doc_b in pairs:
            reports.append((doc_a.id, analytics.agreement(doc_a, doc_b)))
    except analytics.SentenceMismatch as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from exc

    total = sum(len(r.per_sentence_jaccard) for _, r in reports)
    overall = (
        sum(v for _, r in reports for _, v in r.per_sentence_jaccard) / total
        if total
        else 1.0
    )
    if args.format == "json":
        print(
            json.dumps(
                {
                    "mean_jaccard": overall,
                    "documents": [
                        {"document_id": doc_id, **r.to_json()} for doc_id, r in reports
                    ],
                }
            )
        )
    else:
        for doc_id, r in reports:
            print(f"{doc_id}: mean Jaccard {r.mean_jaccard:.3f}")
            print(f"  {'category':>8}  agreement")
            for cid, v in r.per_category:
                print(f"  {cid:>8}  {v:.3f}")
        print(f"mean {overall:.3f}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    documents = DEFAULT_DOCUMENTS
    if args.sizes:
        try:
            sizes = [int(p) for p in args.sizes.split(",")]
        except ValueError as exc:
            raise CliError(EXIT_USAGE, "--sizes must be comma-separated integers") from exc
        if len(sizes) == len(DEFAULT_DOCUMENTS):
            documents = tuple(
                (doc_id, title, size)
                for (doc_id, title, _), size in zip(DEFAULT_DOCUMENTS, sizes)
            )
        else:
            documents = tuple(
                (f"doc{i + 1}", f"Synthetic document {i + 1}", size)
                for i, size in enumerate(sizes)
            )
    try:
        spec = SynthSpec(
            documents=documents,
            mean_tags=args.mean_tags,
            min_tags=args.min_tags,
            max_tags=args.max_tags,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc

    corpus = generate_corpus(spec)
    _write_output(args.out, serialize_corpus(corpus))
    if args.format == "json":
        print(
            json.dumps(
                {
                    "out": args.out,
                    "documents": [
                        {"id": d.id, "sentences": len(d.sentences)}
                        for d in corpus.documents
                    ],
                }
            )
        )
    else:
        sizes = ", ".join(f"{d.id}={len(d.sentences)}" for d in corpus.documents)
        print(f"wrote {args.out} ({sizes})")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    corpus = _load_corpus(args.corpus)
    static_dir = args.static_dir
    if static_dir and not Path(static_dir).is_dir():
        raise CliError(EXIT_IO, f"static dir {static_dir!r} does not exist")
    app = create_app(corpus, static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nearby",
        description="Analytics and layouts for multi-tagged sentence corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, corpus: bool = True) -> None:
        if corpus:
            p.add_argument("--corpus", help="corpus JSON path (or NEARBY_CORPUS env var)")
        p.add_argument(
            "--format", choices=("table", "json"), default="table",
            help="output format",
        )

    p = sub.add_parser("validate", help="check a corpus and print statistics")
    add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="print per-document tag statistics")
    add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="write a view as standalone SVG or JSON")
    p.add_argument("--corpus", help="corpus JSON path (or NEARBY_CORPUS env var)")
    p.add_argument("--document", help="document id (default: first in corpus)")
    p.add_argument("--view", choices=("graph", "matrix", "waffle"), required=True)
    p.add_argument("--exclude", help="comma-separated category keys or ids to drop")
    p.add_argument("--include-only", dest="include_only", help="keep only these categories")
    p.add_argument("--range", help="sentence range start:end")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=("mst", "complete"), default="mst",
                   help="edge strategy for the graph view")
    p.add_argument("--normalize", choices=("raw-max", "conditional"), default="raw-max",
                   help="matrix normalization")
    p.add_argument("--order", choices=("id", "frequency"), default="id",
                   help="matrix display order")
    p.add_argument("--format", choices=("svg", "json"), default="svg")
    p.add_argument("--out", help="output path (default: <document>-<view>.<ext>)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("agreement", help="compare two annotations of the same text")
    p.add_argument("corpus_a")
    p.add_argument("corpus_b")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", default="corpus.json")
    p.add_argument("--sizes", help="comma-separated sentence counts per document")
    p.add_argument("--mean-tags", dest="mean_tags", type=float, default=3.0)
    p.add_argument("--min-tags", dest="min_tags", type=int, default=1)
    p.add_argument("--max-tags", dest="max_tags", type=int, default=5)
    p.add_argument("--seed", type=int, default=1837)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP API (and optionally the studio)")
    p.add_argument("--corpus", help="corpus JSON path (or NEARBY_CORPUS env var)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--static-dir", dest="static_dir",
                   help="serve built studio assets from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except UnknownCategory as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
