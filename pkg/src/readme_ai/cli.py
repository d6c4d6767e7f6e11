"""Command-line interface: validate, build, register, serve.

Exit codes follow one contract everywhere: 0 success, 1 domain failure
(invalid metadata, unresolvable source, failed build, name collision),
2 usage or I/O failure. `build` writes only serialized context to
standard output so it pipes cleanly; reports and diagnostics go to
standard error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ._version import __version__
from .errors import ReadmeAiError, RegistryCollisionError
from .handlers import CrawlPolicy
from .pipeline import run_build
from .server import ReadmeAiServer, ServerConfig
from .sources import (
    Registry,
    classify_source,
    default_cache_dir,
    default_registry_path,
)
from .spec_core import parse_document, validate_document

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="readme-ai",
        description="Build LLM context from Readme_AI.json metadata files.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--cache-dir",
        help="checkout cache directory (overrides READMEAI_CACHE_DIR)",
    )
    parser.add_argument(
        "--registry",
        help="lookup registry file (overrides READMEAI_REGISTRY_PATH)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser(
        "validate", help="check a metadata file and print its diagnostics"
    )
    p_validate.add_argument("path", help="path to a Readme_AI.json file")

    p_build = sub.add_parser(
        "build", help="build serialized context for a URL or registered name"
    )
    p_build.add_argument("url_or_name", help="source URL or registered short name")
    p_build.add_argument(
        "--format",
        choices=("xml", "markdown"),
        default="xml",
        help="output format (default: xml)",
    )
    p_build.add_argument(
        "--include-keys",
        action="append",
        metavar="KEY",
        help="emit only these metadata entries (repeatable, comma-splittable)",
    )
    p_build.add_argument(
        "--lenient",
        action="store_true",
        help="downgrade unknown type tags to warnings instead of failing",
    )
    _add_policy_flags(p_build)

    p_register = sub.add_parser("register", help="bind a short name to a source URL")
    p_register.add_argument("name", help="short name to register")
    p_register.add_argument("url", help="source URL the name resolves to")
    p_register.add_argument(
        "--overwrite", action="store_true", help="replace an existing binding"
    )

    p_serve = sub.add_parser("serve", help="run the JSON-RPC tool server")
    p_serve.add_argument(
        "--framing",
        choices=("lines", "headers"),
        default="lines",
        help="stdio message framing: newline-delimited or Content-Length (default: lines)",
    )
    p_serve.add_argument(
        "--http",
        metavar="HOST:PORT",
        help="serve over local HTTP instead of stdio (testing transport)",
    )
    p_serve.add_argument(
        "--deadline",
        type=float,
        default=120.0,
        help="per-call overall deadline in seconds (default: 120)",
    )
    p_serve.add_argument(
        "--lenient",
        action="store_true",
        help="downgrade unknown type tags to warnings instead of failing",
    )
    _add_policy_flags(p_serve)
    return parser


def _add_policy_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--max-pages", type=int, help="crawl page budget per entry")
    sub.add_argument("--max-depth", type=int, help="crawl link depth from each seed")
    sub.add_argument(
        "--allow-host",
        action="append",
        metavar="HOST",
        help="additionally allowed crawl hostname (repeatable)",
    )
    sub.add_argument(
        "--deny-host",
        action="append",
        metavar="HOST",
        help="always-excluded crawl hostname (repeatable; wins over allows)",
    )
    sub.add_argument("--timeout", type=float, help="per-request timeout in seconds")
    sub.add_argument(
        "--delay", type=float, help="politeness delay between requests to one host"
    )


def _policy_from_args(args) -> CrawlPolicy:
    kwargs = {}
    if args.max_pages is not None:
        kwargs["max_pages"] = args.max_pages
    if args.max_depth is not None:
        kwargs["max_depth"] = args.max_depth
    if args.allow_host:
        kwargs["allow_hosts"] = frozenset(args.allow_host)
        # An explicit allow list implies crawling beyond the seed host.
        kwargs["same_host_only"] = False
    if args.deny_host:
        kwargs["deny_hosts"] = frozenset(args.deny_host)
    if args.timeout is not None:
        kwargs["timeout"] = args.timeout
    if args.delay is not None:
        kwargs["request_delay"] = args.delay
    return CrawlPolicy(**kwargs)


def _split_keys(raw: list[str] | None) -> list[str] | None:
    if raw is None:
        return None
    keys = []
    for chunk in raw:
        keys.extend(k.strip() for k in chunk.split(",") if k.strip())
    return keys


def cmd_validate(args) -> int:
    path = Path(args.path)
    try:
        raw = path.read_bytes().decode("utf-8", errors="replace")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    doc, diagnostics = parse_document(raw, source_path=str(path))
    if doc is not None:
        diagnostics = diagnostics + validate_document(doc)
    for diag in diagnostics:
        print(diag, file=sys.stderr)
    has_errors = any(d.severity == "error" for d in diagnostics)
    return EXIT_FAILURE if has_errors else EXIT_OK


def cmd_build(args) -> int:
    try:
        outcome = run_build(
            args.url_or_name,
            cache_dir=args.cache_dir or default_cache_dir(),
            registry_path=args.registry or default_registry_path(),
            policy=_policy_from_args(args),
            include_keys=_split_keys(args.include_keys),
            output_format=args.format,
            lenient=args.lenient,
        )
    except ReadmeAiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for diag in getattr(exc, "diagnostics", []):
            print(diag, file=sys.stderr)
        return EXIT_FAILURE

    sys.stdout.write(outcome.content)
    if outcome.content and not outcome.content.endswith("\n"):
        sys.stdout.write("\n")
    sys.stdout.flush()

    report = outcome.report
    for diag in report.diagnostics:
        print(diag, file=sys.stderr)
    print(
        f"report: tokens={report.token_count} items={report.items_total} "
        f"failed={report.items_failed} duration={report.duration:.2f}s",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_register(args) -> int:
    ref = classify_source(args.url)
    if ref.kind != "url":
        print(f"error: {args.url!r} is not an absolute http/https/file URL", file=sys.stderr)
        return EXIT_USAGE
    registry = Registry(args.registry or default_registry_path())
    try:
        registry.register(args.name, args.url, overwrite=args.overwrite)
    except RegistryCollisionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ReadmeAiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"registered {args.name.strip().lower()} -> {args.url}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    config = ServerConfig(
        cache_dir=args.cache_dir or default_cache_dir(),
        registry_path=args.registry or default_registry_path(),
        policy=_policy_from_args(args),
        lenient=args.lenient,
        framing=args.framing,
        call_deadline=args.deadline,
    )
    server = ReadmeAiServer(config)
    if args.http:
        host, _, port = args.http.rpartition(":")
        try:
            httpd = server.make_http_server(host or "127.0.0.1", int(port))
        except (ValueError, OSError) as exc:
            print(f"error: cannot listen on {args.http!r}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        logger.info("serving HTTP on %s:%s", *httpd.server_address[:2])
        try:
            httpd.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            httpd.server_close()
        return EXIT_OK
    return server.serve_stdio()


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "validate": cmd_validate,
        "build": cmd_build,
        "register": cmd_register,
        "serve": cmd_serve,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
