"""readme_ai: build structured LLM context from Readme_AI.json metadata files.

A data source owner places a ``Readme_AI.json`` file at the root of their
repository describing what context a language model should receive about the
source: plain-text descriptions, files to fetch, documentation sites to
crawl, and publications to download. This package parses those files, runs
the acquisition handlers, and emits the collected material as tagged XML or
Markdown, either from the command line or through a JSON-RPC tool server.
"""

from ._version import __version__
from .context import (
    BuildReport,
    ContextTree,
    build_context,
    count_tokens,
    serialize_markdown,
    serialize_xml,
)
from .errors import (
    AcquisitionError,
    BuildError,
    DispatchError,
    ReadmeAiError,
    RegistryCollisionError,
    SourceResolutionError,
    SpecInvalidError,
    SpecMissingError,
)
from .handlers import ContextItem, CrawlPolicy, HandlerRegistry, default_registry, dispatch
from .sources import Checkout, Registry, SourceRef, acquire_repo, classify_source, resolve_source
from .spec_core import Diagnostic, Entry, ReadmeAiDocument, parse_document, validate_document

__all__ = [
    "__version__",
    "AcquisitionError",
    "BuildError",
    "BuildReport",
    "Checkout",
    "ContextItem",
    "ContextTree",
    "CrawlPolicy",
    "Diagnostic",
    "DispatchError",
    "Entry",
    "HandlerRegistry",
    "ReadmeAiDocument",
    "ReadmeAiError",
    "Registry",
    "RegistryCollisionError",
    "SourceRef",
    "SourceResolutionError",
    "SpecInvalidError",
    "SpecMissingError",
    "acquire_repo",
    "build_context",
    "classify_source",
    "count_tokens",
    "default_registry",
    "dispatch",
    "parse_document",
    "resolve_source",
    "serialize_markdown",
    "serialize_xml",
    "validate_document",
]
