"""Crawl handler: bounded breadth-first traversal of documentation sites.

Each seed is fetched and its page text captured; hyperlinks that pass the
crawl policy are followed in first-in-first-out order, links within a page
sorted lexicographically, until the page budget or depth limit is reached.
A shared per-host throttle enforces the request delay across concurrent
crawls in the same process.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import deque
from urllib.parse import urlsplit, urlunsplit

import requests

from ..net import make_session, read_capped
from ..spec_core import DataSpec, Diagnostic
from .base import ContextItem, CrawlPolicy, clip_text
from .htmltext import extract_text_and_links

logger = logging.getLogger(__name__)


def canonicalize_url(url: str) -> str:
    """Canonical form used for the visited set and item labels.

    Lowercases scheme and authority, removes the fragment, and normalizes
    the trailing slash (an empty path becomes "/", any other trailing
    slash is dropped). The query string is preserved.
    """
    parts = urlsplit(url)
    path = parts.path or "/"
    if path != "/" and path.endswith("/"):
        path = path.rstrip("/") or "/"
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), path, parts.query, ""))


class _HostThrottle:
    """Enforces a minimum delay between requests to the same host."""

    def __init__(self) -> None:
        self._last: dict[str, float] = {}
        self._lock = threading.Lock()

    def wait(self, host: str, delay: float) -> None:
        if delay <= 0:
            return
        while True:
            with self._lock:
                now = time.monotonic()
                last = self._last.get(host)
                if last is None or now - last >= delay:
                    self._last[host] = now
                    return
                remaining = delay - (now - last)
            time.sleep(remaining)


#: Process-wide throttle so concurrent crawls still honor per-host delays.
_THROTTLE = _HostThrottle()


def web_crawler(
    seed_urls: list[str],
    policy: CrawlPolicy,
    diagnostics: list[Diagnostic] | None = None,
    descriptions: dict[str, str] | None = None,
    session: requests.Session | None = None,
) -> list[ContextItem]:
    """Breadth-first crawl from the seeds, one item per fetched page.

    Items appear in visitation order, labeled with the canonical URL. Only
    HTML and plain-text responses produce items; HTML pages also feed the
    frontier. An unreachable seed yields an error item; failures on
    discovered pages are recorded as diagnostics and skipped.
    """
    diags = diagnostics if diagnostics is not None else []
    descs = descriptions or {}
    own_session = session is None
    http = session or make_session()
    items: list[ContextItem] = []
    visited: set[str] = set()
    queue: deque[tuple[str, int, str]] = deque()  # (canonical url, depth, seed authority)
    requests_made = 0

    try:
        for raw_seed in seed_urls:
            seed = canonicalize_url(raw_seed)
            parts = urlsplit(seed)
            if parts.scheme not in ("http", "https") or not parts.netloc:
                items.append(
                    ContextItem(label=raw_seed, origin="crawl",
                                error="seed must be an absolute http or https URL")
                )
                continue
            if not policy.is_eligible(seed, parts.netloc):
                diags.append(
                    Diagnostic("warning", seed, "seed excluded by crawl policy")
                )
                continue
            if seed not in visited:
                visited.add(seed)
                queue.append((seed, 0, parts.netloc))

        while queue and requests_made < policy.max_pages:
            url, depth, seed_authority = queue.popleft()
            host = urlsplit(url).hostname or ""
            _THROTTLE.wait(host, policy.request_delay)
            requests_made += 1

            try:
                response = http.get(url, timeout=policy.timeout, stream=True)
            except requests.RequestException as exc:
                if depth == 0:
                    items.append(ContextItem(label=url, origin="crawl",
                                             error=f"fetch failed: {exc}"))
                else:
                    diags.append(Diagnostic("warning", url, f"fetch failed: {exc}"))
                continue

            with response:
                status = response.status_code
                if status >= 400:
                    if depth == 0:
                        items.append(ContextItem(label=url, origin="crawl",
                                                 error=f"HTTP {status}"))
                    else:
                        diags.append(Diagnostic("warning", url, f"HTTP {status}"))
                    continue
                content_type = response.headers.get("Content-Type", "").lower()
                body, truncated = read_capped(response, policy.max_content_bytes)
                final_url = canonicalize_url(response.url)
                visited.add(final_url)

            charset = response.encoding or "utf-8"
            if "html" in content_type:
                try:
                    html = body.decode(charset, errors="replace")
                except LookupError:
                    html = body.decode("utf-8", errors="replace")
                text, links = extract_text_and_links(html, base_url=final_url)
                if depth < policy.max_depth:
                    for link in sorted(set(canonicalize_url(x) for x in links)):
                        if link in visited:
                            continue
                        if not policy.is_eligible(link, seed_authority):
                            continue
                        visited.add(link)
                        queue.append((link, depth + 1, seed_authority))
            elif content_type.startswith("text/") or not content_type:
                try:
                    text = body.decode(charset, errors="replace")
                except LookupError:
                    text = body.decode("utf-8", errors="replace")
            else:
                diags.append(
                    Diagnostic("warning", url,
                               f"skipped unsupported content type {content_type!r}")
                )
                continue

            content, clipped = clip_text(text)
            items.append(
                ContextItem(
                    label=url,
                    content=content,
                    description=descs.get(url),
                    origin="crawl",
                    truncated=truncated or clipped,
                )
            )
    finally:
        if own_session:
            http.close()

    return items


def crawl_data(
    data: DataSpec,
    policy: CrawlPolicy,
    diagnostics: list[Diagnostic] | None = None,
    session: requests.Session | None = None,
) -> list[ContextItem]:
    """Adapter from a structured entry's data to the crawler: targets are seeds."""
    descriptions = {
        canonicalize_url(target): desc
        for target, desc in data.pairs()
        if desc
    }
    return web_crawler(
        list(data.targets),
        policy,
        diagnostics=diagnostics,
        descriptions=descriptions,
        session=session,
    )
