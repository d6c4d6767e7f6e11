"""Fetch handler: pull files out of an acquired repository checkout.

Data strings are paths relative to the checkout root; a leading ``/`` also
means root-relative. ``*`` matches within one path segment, ``**`` crosses
segments, ``?`` matches one character. Every resolved file must stay inside
the checkout root; escapes are refused and recorded.
"""

from __future__ import annotations

import logging
import posixpath
import re
from pathlib import Path

from ..sources import Checkout
from ..spec_core import DataSpec, Diagnostic
from .base import ContextItem, clip_text

logger = logging.getLogger(__name__)

#: Bytes inspected for the null-byte binary heuristic.
_BINARY_SNIFF_BYTES = 8192

_GLOB_CHARS = re.compile(r"[*?\[]")
_WINDOWS_ABS = re.compile(r"^(?:[A-Za-z]:[/\\]|\\\\)")


def _normalize_data_path(raw: str) -> str | None:
    """Map a data string onto a root-relative posix path, or None on escape."""
    if _WINDOWS_ABS.match(raw):
        return None
    candidate = raw.replace("\\", "/").lstrip("/")
    if not candidate:
        return None
    normalized = posixpath.normpath(candidate)
    if normalized == ".." or normalized.startswith("../") or normalized.startswith("/"):
        return None
    if normalized == ".":
        return None
    return normalized


def _is_binary(path: Path) -> bool:
    with open(path, "rb") as fh:
        return b"\0" in fh.read(_BINARY_SNIFF_BYTES)


def fetch_data(
    checkout: Checkout,
    data: DataSpec,
    diagnostics: list[Diagnostic] | None = None,
) -> list[ContextItem]:
    """Resolve each data path against the checkout and read the matching files.

    One item per matched regular file, expanded in lexicographic order per
    pattern, labeled with its root-relative path. Escaping paths and binary
    files are skipped with a diagnostic; a path matching nothing yields an
    error item. A failure on one element never suppresses the others.
    """
    diags = diagnostics if diagnostics is not None else []
    root = checkout.root_path.resolve()
    items: list[ContextItem] = []

    for raw, description in data.pairs():
        normalized = _normalize_data_path(raw)
        if normalized is None:
            diags.append(
                Diagnostic("error", raw, "path escapes the repository root; skipped")
            )
            logger.warning("refusing path outside checkout: %r", raw)
            continue

        try:
            matches = _expand(root, normalized)
        except (OSError, ValueError) as exc:
            items.append(
                ContextItem(label=raw, origin="fetch", description=description,
                            error=f"cannot expand path: {exc}")
            )
            continue

        if not matches:
            items.append(
                ContextItem(label=raw, origin="fetch", description=description,
                            error="no file matches this path")
            )
            continue

        for path in matches:
            resolved = path.resolve()
            if resolved != root and root not in resolved.parents:
                diags.append(
                    Diagnostic(
                        "error",
                        raw,
                        f"{path} resolves outside the repository root; skipped",
                    )
                )
                continue
            label = "/" + path.relative_to(root).as_posix()
            try:
                if _is_binary(path):
                    diags.append(
                        Diagnostic("warning", label, "binary file skipped")
                    )
                    continue
                text = path.read_bytes().decode("utf-8", errors="replace")
            except OSError as exc:
                items.append(
                    ContextItem(label=label, origin="fetch", description=description,
                                error=f"cannot read file: {exc}")
                )
                continue
            content, truncated = clip_text(text)
            items.append(
                ContextItem(
                    label=label,
                    content=content,
                    description=description,
                    origin="fetch",
                    truncated=truncated,
                )
            )
    return items


def _expand(root: Path, pattern: str) -> list[Path]:
    """Expand one normalized pattern to regular files, sorted lexicographically."""
    if not _GLOB_CHARS.search(pattern):
        path = root / pattern
        return [path] if path.is_file() else []
    matches = [p for p in root.glob(pattern) if p.is_file()]
    return sorted(matches, key=lambda p: p.as_posix())
