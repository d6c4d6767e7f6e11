"""Shared types for the acquisition handlers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..sources import Checkout
from ..spec_core import DataSpec, Diagnostic

#: Cap on extracted text kept per item; longer content is cut and flagged.
MAX_ITEM_TEXT_CHARS = 512 * 1024

#: Cap on a single downloaded payload.
MAX_DOWNLOAD_BYTES = 50 * 1024 * 1024


@dataclass(frozen=True)
class ContextItem:
    """One labeled piece of acquired text.

    ``origin`` is the type tag of the handler that produced the item.
    Items with ``error`` set represent failed acquisitions; they carry an
    explanation instead of content and are reported rather than emitted
    into the context tree.
    """

    label: str
    content: str = ""
    description: str | None = None
    origin: str = "custom"
    truncated: bool = False
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class CrawlPolicy:
    """Bounds and scope rules for network acquisition.

    A URL is eligible iff: when ``same_host_only`` is set its authority
    (host:port) equals the seed's, its hostname is not in ``deny_hosts``,
    and ``allow_hosts`` is either empty or contains its hostname. Denial
    always wins over allowance. ``allow_hosts``/``deny_hosts`` match bare
    hostnames, case-insensitively, ignoring ports.

    Durations are seconds. ``respect_robots`` is reserved for a future
    robots.txt implementation and must currently stay False.
    """

    max_pages: int = 50
    max_depth: int = 3
    same_host_only: bool = True
    allow_hosts: frozenset[str] = frozenset()
    deny_hosts: frozenset[str] = frozenset()
    request_delay: float = 0.5
    timeout: float = 15.0
    max_content_bytes: int = 1024 * 1024
    respect_robots: bool = False

    def __post_init__(self):
        if self.max_pages < 1:
            raise ValueError("max_pages must be positive")
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        if self.respect_robots:
            raise NotImplementedError("robots.txt handling is not implemented yet")
        object.__setattr__(self, "allow_hosts", frozenset(h.lower() for h in self.allow_hosts))
        object.__setattr__(self, "deny_hosts", frozenset(h.lower() for h in self.deny_hosts))

    def is_eligible(self, url: str, seed_authority: str) -> bool:
        """Apply the scope predicate to a canonicalized URL."""
        from urllib.parse import urlsplit

        parts = urlsplit(url)
        hostname = (parts.hostname or "").lower()
        if self.same_host_only and parts.netloc.lower() != seed_authority.lower():
            return False
        if hostname in self.deny_hosts:
            return False
        if self.allow_hosts and hostname not in self.allow_hosts:
            return False
        return True


@dataclass
class HandlerContext:
    """Everything a handler gets to work with for one structured entry."""

    entry_key: str
    data: DataSpec
    checkout: Optional[Checkout]
    policy: CrawlPolicy
    diagnostics: list[Diagnostic] = field(default_factory=list)


#: A handler converts one structured entry's data into context items.
Handler = Callable[[HandlerContext], "list[ContextItem]"]


def clip_text(text: str, limit: int = MAX_ITEM_TEXT_CHARS) -> tuple[str, bool]:
    """Cut text at the per-item cap; returns (text, was_truncated)."""
    if len(text) <= limit:
        return text, False
    return text[:limit], True
