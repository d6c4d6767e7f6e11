"""Typed data-acquisition handlers and their registry.

Each structured entry in a metadata file names a type tag; the registry
maps tags to handler callables. The built-in tags are:

- ``fetch``: read files from the repository checkout
- ``crawl``: breadth-first crawl of web documentation
- ``download``: download documents (PDF or text) and extract their text

Custom tags can be registered at runtime; replacing an existing handler
requires an explicit override.
"""

from __future__ import annotations

from ..errors import DispatchError
from ..spec_core import Diagnostic, StructuredObject, _pointer
from .base import (
    ContextItem,
    CrawlPolicy,
    Handler,
    HandlerContext,
    clip_text,
)
from .crawl import canonicalize_url, crawl_data, web_crawler
from .download import download_data
from .fetch import fetch_data
from .pdftext import PdfExtractionError, extract_pdf_text

__all__ = [
    "ContextItem",
    "CrawlPolicy",
    "Handler",
    "HandlerContext",
    "HandlerRegistry",
    "PdfExtractionError",
    "canonicalize_url",
    "clip_text",
    "crawl_data",
    "default_registry",
    "dispatch",
    "download_data",
    "extract_pdf_text",
    "fetch_data",
    "register_handler",
    "web_crawler",
]


def _fetch_handler(ctx: HandlerContext) -> list[ContextItem]:
    if ctx.checkout is None:
        return [
            ContextItem(
                label=ctx.entry_key,
                origin="fetch",
                error="no repository checkout available for fetch",
            )
        ]
    return fetch_data(ctx.checkout, ctx.data, ctx.diagnostics)


def _crawl_handler(ctx: HandlerContext) -> list[ContextItem]:
    return crawl_data(ctx.data, ctx.policy, ctx.diagnostics)


def _download_handler(ctx: HandlerContext) -> list[ContextItem]:
    return download_data(ctx.data, ctx.diagnostics, timeout=ctx.policy.timeout)


_BUILTINS: dict[str, Handler] = {
    "fetch": _fetch_handler,
    "crawl": _crawl_handler,
    "download": _download_handler,
}


class HandlerRegistry:
    """Maps lowercase type tags to handler callables.

    The built-in handlers are installed on construction, so every
    registry can serve the core tags out of the box.
    """

    def __init__(self) -> None:
        self._handlers: dict[str, Handler] = dict(_BUILTINS)

    def register(self, tag: str, handler: Handler, *, override: bool = False) -> None:
        """Register *handler* for *tag*.

        Raises ValueError for an empty tag, or when the tag is already
        registered and *override* is not set.
        """
        key = tag.strip().lower()
        if not key:
            raise ValueError("type tag must be a non-empty string")
        if key in self._handlers and not override:
            raise ValueError(
                f"type tag {key!r} is already registered; pass override=True to replace it"
            )
        self._handlers[key] = handler

    def get(self, tag: str) -> Handler | None:
        return self._handlers.get(tag.strip().lower())

    def tags(self) -> list[str]:
        return sorted(self._handlers)

    def __contains__(self, tag: str) -> bool:
        return tag.strip().lower() in self._handlers


_GLOBAL_REGISTRY = HandlerRegistry()


def default_registry() -> HandlerRegistry:
    """The process-wide registry used when no explicit registry is given."""
    return _GLOBAL_REGISTRY


def register_handler(tag: str, handler: Handler, *, override: bool = False) -> None:
    """Register a handler in the process-wide registry."""
    _GLOBAL_REGISTRY.register(tag, handler, override=override)


def dispatch(
    entry_key: str,
    structured: StructuredObject,
    checkout=None,
    registry: HandlerRegistry | None = None,
    policy: CrawlPolicy | None = None,
    *,
    lenient: bool = False,
    diagnostics: list[Diagnostic] | None = None,
) -> list[ContextItem]:
    """Run the handler for a structured entry and return its items.

    Unknown tags raise DispatchError, unless *lenient* is set, in which
    case the entry yields a warning diagnostic plus one failed item so
    the build can continue.
    """
    reg = registry or _GLOBAL_REGISTRY
    diags = diagnostics if diagnostics is not None else []
    tag = structured.type_tag
    handler = reg.get(tag)
    if handler is None:
        if not lenient:
            raise DispatchError(tag, reg.tags())
        diags.append(
            Diagnostic(
                "warning",
                _pointer(entry_key, "type"),
                f"no handler registered for type tag {tag!r}; entry skipped",
            )
        )
        return [
            ContextItem(
                label=entry_key,
                origin=tag,
                error=f"no handler registered for type tag {tag!r}",
            )
        ]
    ctx = HandlerContext(
        entry_key=entry_key,
        data=structured.data,
        checkout=checkout,
        policy=policy or CrawlPolicy(),
        diagnostics=diags,
    )
    return handler(ctx)
