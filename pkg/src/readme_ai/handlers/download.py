"""Download documents (PDFs or plain text) and extract their text."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable
from urllib.parse import urlsplit
from urllib.request import url2pathname

import requests

from ..net import make_session, read_capped
from ..spec_core import Diagnostic
from .base import MAX_DOWNLOAD_BYTES, MAX_ITEM_TEXT_CHARS, ContextItem, clip_text
from .pdftext import PdfExtractionError, extract_pdf_text

logger = logging.getLogger(__name__)

#: Signature for a pluggable PDF text extractor.
PdfExtractor = Callable[[bytes], str]


def _looks_like_pdf(content_type: str, payload: bytes) -> bool:
    if content_type.split(";")[0].strip().lower() == "application/pdf":
        return True
    return payload.lstrip()[:5].startswith(b"%PDF")


def _read_local(url: str) -> bytes:
    path = Path(url2pathname(urlsplit(url).path))
    data = path.read_bytes()
    if len(data) > MAX_DOWNLOAD_BYTES:
        raise OSError(f"file exceeds the {MAX_DOWNLOAD_BYTES} byte download limit")
    return data


def download_data(
    data,
    diagnostics: list[Diagnostic] | None = None,
    *,
    session: requests.Session | None = None,
    extractor: PdfExtractor = extract_pdf_text,
    timeout: float = 15.0,
) -> list[ContextItem]:
    """Download each URL in *data* and return one item per document.

    PDF payloads go through *extractor*; textual payloads are passed
    through as-is. A failed URL yields an error item and the batch
    continues.
    """
    diags = diagnostics if diagnostics is not None else []
    own_session = session is None
    sess = session or make_session()
    items: list[ContextItem] = []
    try:
        for url, description in data.pairs():
            items.append(_download_one(url, description, sess, extractor, timeout, diags))
    finally:
        if own_session:
            sess.close()
    return items


def _download_one(
    url: str,
    description: str | None,
    session: requests.Session,
    extractor: PdfExtractor,
    timeout: float,
    diags: list[Diagnostic],
) -> ContextItem:
    scheme = urlsplit(url).scheme.lower()
    truncated = False
    content_type = ""
    try:
        if scheme == "file":
            payload = _read_local(url)
        elif scheme in ("http", "https"):
            with session.get(url, timeout=timeout, stream=True) as response:
                if response.status_code >= 400:
                    return ContextItem(
                        label=url,
                        description=description,
                        origin="download",
                        error=f"HTTP {response.status_code}",
                    )
                content_type = response.headers.get("Content-Type", "")
                payload, truncated = read_capped(response, MAX_DOWNLOAD_BYTES)
        else:
            return ContextItem(
                label=url,
                description=description,
                origin="download",
                error="unsupported URL scheme; expected http, https, or file",
            )
    except (requests.RequestException, OSError) as exc:
        return ContextItem(
            label=url, description=description, origin="download", error=str(exc)
        )

    if truncated:
        diags.append(Diagnostic("warning", url, "download hit the size cap; content truncated"))

    if _looks_like_pdf(content_type, payload):
        try:
            text = extractor(payload)
        except PdfExtractionError as exc:
            return ContextItem(
                label=url,
                description=description,
                origin="download",
                error=f"PDF extraction failed: {exc}",
            )
    elif b"\x00" in payload[:8192]:
        return ContextItem(
            label=url,
            description=description,
            origin="download",
            error=f"unsupported binary content ({content_type or 'unknown type'})",
        )
    else:
        text = payload.decode("utf-8", errors="replace")

    text, clipped = clip_text(text, MAX_ITEM_TEXT_CHARS)
    return ContextItem(
        label=url,
        content=text,
        description=description,
        origin="download",
        truncated=truncated or clipped,
    )


__all__ = ["download_data", "PdfExtractor"]
