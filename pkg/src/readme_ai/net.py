"""Shared HTTP client configuration."""

from __future__ import annotations

import requests

from ._version import __version__

USER_AGENT = f"readme-ai/{__version__} (context acquisition)"

#: Redirect ceiling for all outbound requests.
MAX_REDIRECTS = 5


def make_session() -> requests.Session:
    session = requests.Session()
    session.headers["User-Agent"] = USER_AGENT
    session.max_redirects = MAX_REDIRECTS
    return session


def read_capped(response: requests.Response, max_bytes: int) -> tuple[bytes, bool]:
    """Read a streamed response body up to ``max_bytes``.

    Returns (payload, was_truncated). The connection is closed once the
    cap is hit so oversized bodies are not drained.
    """
    chunks: list[bytes] = []
    total = 0
    truncated = False
    for chunk in response.iter_content(chunk_size=65536):
        chunks.append(chunk)
        total += len(chunk)
        if total > max_bytes:
            truncated = True
            break
    response.close()
    payload = b"".join(chunks)
    return (payload[:max_bytes], True) if truncated else (payload, False)
