"""Command-line interface: one-shot analysis, provenance inspection, serving.

Exit codes: 0 completed (regardless of verdict), 2 usage error,
3 ingestion/file/bind failure, 4 backend or verdict-parse failure.
"""

from __future__ import annotations

import argparse
import socket
import sys
from pathlib import Path
from typing import Optional

from .article import Article, MediaItem, MediaKind, kind_from_locator
from .engine import Engine, EngineConfig, result_to_dict
from .errors import AnalysisError, ManifestParseError, MediaContextError, ValidationError
from .llm import ModelConfig, build_backend
from .provenance.container import detect_media_format, extract_embedded_manifest
from .provenance.manifest import parse_manifest_store
from .provenance.model import filter_fields, record_to_dict, render_summary
from .serialization import canonical_json
from .service import ServiceConfig, create_app

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INGEST = 3
EXIT_BACKEND = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mediacontext",
        description="Check whether the media attached to a news article are contextually relevant.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="analyze an article by URL or as structured data")
    analyze.add_argument("--url", help="article URL to scrape")
    analyze.add_argument("--title", help="article title (structured mode)")
    analyze.add_argument("--body", help="article body (structured mode)")
    analyze.add_argument(
        "--media",
        action="append",
        default=[],
        metavar="PATH[:CAPTION]",
        help="media path/URL with optional caption after the last unescaped colon; repeatable",
    )
    analyze.add_argument("--json", action="store_true", help="print the canonical result document")
    analyze.add_argument("--backend", choices=["mock", "remote"], help="model backend (default: environment)")
    analyze.add_argument("--mock-script", help="JSON file scripting the mock backend")
    analyze.add_argument("--per-media", action="store_true", help="one model call per media item")
    analyze.set_defaults(handler=_cmd_analyze)

    inspect = sub.add_parser("provenance-inspect", help="dump provenance metadata of a media file")
    inspect.add_argument("file", help="path to a JPEG or PNG file")
    inspect.add_argument("--summary", action="store_true", help="print the LLM-readable summary")
    inspect.set_defaults(handler=_cmd_inspect)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8099, help="0 picks a free port")
    serve.add_argument("--journal", help="append-only journal file (replayed on startup)")
    serve.set_defaults(handler=_cmd_serve)

    return parser


def split_media_flag(value: str) -> tuple[str, Optional[str]]:
    """Split ``PATH[:CAPTION]`` at the last colon not escaped as ``\\:``."""
    for index in range(len(value) - 1, -1, -1):
        if value[index] == ":" and (index == 0 or value[index - 1] != "\\"):
            return value[:index].replace("\\:", ":"), value[index + 1 :] or None
    return value.replace("\\:", ":"), None


def _model_config(args: argparse.Namespace) -> ModelConfig:
    base = ServiceConfig.from_env().model
    if args.backend:
        base.backend = args.backend
    if args.mock_script:
        base.backend = "mock"
        base.mock_script_path = args.mock_script
    return base


def _cmd_analyze(args: argparse.Namespace) -> int:
    structured = args.title is not None or args.body is not None or args.media
    if args.url and structured:
        print("error: --url and --title/--body/--media are mutually exclusive", file=sys.stderr)
        return EXIT_USAGE
    if not args.url and not (args.title and args.body):
        print("error: provide --url, or both --title and --body", file=sys.stderr)
        return EXIT_USAGE

    try:
        backend = build_backend(_model_config(args))
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    engine = Engine(backend, EngineConfig(per_media=args.per_media))

    if args.url:
        source: str | Article = args.url
    else:
        media = []
        for flag in args.media:
            locator, caption = split_media_flag(flag)
            kind = kind_from_locator(locator) or MediaKind.IMAGE
            media.append(MediaItem(locator=locator, kind=kind, caption=caption))
        source = Article(title=args.title, body=args.body, media=media)

    try:
        result = engine.analyze(source)
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST if exc.stage == "ingest" else EXIT_BACKEND
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.json:
        print(canonical_json(result_to_dict(result)))
    else:
        _print_report(result)
    return EXIT_OK


def _print_report(result) -> None:
    boxes = result.boxes
    print(f"Overall assessment: {boxes.overall_label.value}")
    print(f"  {boxes.overall_headline}")
    print()
    print(f"Location and Source: {'relevant' if boxes.location_flag else 'flagged'}")
    print(f"  {boxes.location_reason}")
    print()
    print(f"Tampering: {'relevant' if boxes.tampering_flag else 'flagged'}")
    print(f"  {boxes.tampering_reason}")
    if result.warnings:
        print()
        print("Warnings:")
        for warning in result.warnings:
            print(f"  - {warning}")


def _cmd_inspect(args: argparse.Namespace) -> int:
    path = Path(args.file)
    try:
        content = path.read_bytes()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_INGEST
    media_format = detect_media_format(content)
    if media_format is None:
        print(f"error: {path} is not a JPEG or PNG file", file=sys.stderr)
        return EXIT_INGEST
    try:
        store = extract_embedded_manifest(content, media_format)
        record = parse_manifest_store(store) if store is not None else None
    except ManifestParseError as exc:
        # Undecodable metadata is a finding, not a tool failure.
        print(f"Provenance metadata is present but could not be decoded. ({exc})")
        return EXIT_OK
    if record is None:
        print("no provenance metadata")
        return EXIT_OK
    filtered = filter_fields(record)
    if args.summary:
        print(render_summary(filtered, str(path)).text)
    else:
        print(canonical_json(record_to_dict(filtered)))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    try:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((args.host, args.port))
        sock.listen(128)
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_INGEST
    host, port = sock.getsockname()[:2]
    try:
        config = ServiceConfig.from_env(bind_address=host, port=port, **(
            {"journal_path": args.journal} if args.journal else {}
        ))
    except ValidationError as exc:
        sock.close()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    app = create_app(config)
    print(f"mediacontext service listening on http://{host}:{port}", flush=True)
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    try:
        server.run(sockets=[sock])
    except KeyboardInterrupt:
        pass
    finally:
        sock.close()
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except MediaContextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
