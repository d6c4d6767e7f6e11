"""End-to-end build pipeline shared by the CLI and the tool server.

One call takes a URL or registered name all the way to serialized
context: resolve, acquire the repository, read and parse its
Readme_AI.json, run the handlers, and render the tree.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .context import BuildReport, ContextTree, build_context, serialize
from .errors import SpecInvalidError
from .handlers import CrawlPolicy, HandlerRegistry
from .sources import (
    Checkout,
    Registry,
    acquire_repo,
    classify_source,
    default_cache_dir,
    default_registry_path,
    resolve_source,
)
from .spec_core import ReadmeAiDocument, parse_document

logger = logging.getLogger(__name__)

#: Pipeline stages, in execution order; reported through the stage callback.
STAGES = ("resolve", "acquire", "parse", "build", "serialize")


@dataclass
class BuildOutcome:
    """Everything a successful pipeline run produces."""

    content: str
    output_format: str
    tree: ContextTree
    report: BuildReport
    doc: ReadmeAiDocument
    checkout: Checkout
    url: str


def run_build(
    url_or_name: str,
    *,
    cache_dir: str | Path | None = None,
    registry: Registry | None = None,
    registry_path: str | Path | None = None,
    handler_registry: HandlerRegistry | None = None,
    policy: CrawlPolicy | None = None,
    include_keys=None,
    output_format: str = "xml",
    lenient: bool = False,
    on_stage: Callable[[str], None] | None = None,
) -> BuildOutcome:
    """Build serialized context for a URL or registered name.

    *on_stage* is called with each stage name as it starts, so callers
    enforcing a deadline can report how far the run got. Raises the
    underlying error types (SourceResolutionError, AcquisitionError,
    SpecMissingError, SpecInvalidError, DispatchError, BuildError).
    """
    stage = on_stage or (lambda _stage: None)

    stage("resolve")
    reg = registry or Registry(registry_path or default_registry_path())
    url = resolve_source(classify_source(url_or_name), reg)

    stage("acquire")
    checkout = acquire_repo(url, cache_dir or default_cache_dir())

    stage("parse")
    raw = checkout.spec_path.read_bytes().decode("utf-8", errors="replace")
    doc, diagnostics = parse_document(raw, source_path=str(checkout.spec_path))
    if doc is None:
        errors = [d for d in diagnostics if d.severity == "error"]
        raise SpecInvalidError(
            f"{checkout.spec_path}: invalid metadata file ({len(errors)} errors)",
            diagnostics,
        )

    stage("build")
    tree, report = build_context(
        doc,
        checkout=checkout,
        registry=handler_registry,
        policy=policy,
        include_keys=include_keys,
        lenient=lenient,
        output_format=output_format,
    )
    report.diagnostics = diagnostics + report.diagnostics

    stage("serialize")
    content = serialize(tree, output_format)
    return BuildOutcome(
        content=content,
        output_format=output_format,
        tree=tree,
        report=report,
        doc=doc,
        checkout=checkout,
        url=url,
    )
