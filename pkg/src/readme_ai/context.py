"""Context tree assembly and serialization.

build_context walks a parsed document in entry order, runs the handler
for each structured entry, and assembles a tree of tagged nodes. The
serializers turn that tree into tagged XML (default) or Markdown, and
count_tokens provides a stable size estimate of the result.
"""

from __future__ import annotations

import re
import time
import unicodedata
from dataclasses import dataclass, field

from .errors import BuildError
from .handlers import CrawlPolicy, HandlerRegistry, default_registry, dispatch
from .sources import Checkout
from .spec_core import Diagnostic, ReadmeAiDocument, _pointer

#: Child element stem per handler origin; unknown origins fall back to "item".
_STEM_BY_ORIGIN = {"fetch": "file", "crawl": "link", "download": "paper"}

_TAG_RE = re.compile(r"[A-Z][A-Z0-9_]*\Z")
_INDENT = "    "

OUTPUT_FORMATS = ("xml", "markdown")


@dataclass(frozen=True)
class ContextChild:
    """One acquired piece of content nested under a node."""

    tag: str
    content: str
    description: str | None = None


@dataclass(frozen=True)
class ContextNode:
    """One document entry in the tree: either inline text or acquired children."""

    tag: str
    text: str | None = None
    children: tuple[ContextChild, ...] = ()


@dataclass(frozen=True)
class ContextTree:
    """Ordered nodes, one per successfully processed entry."""

    nodes: tuple[ContextNode, ...] = ()

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)


@dataclass
class BuildReport:
    """Accounting for one build: size, failures, and everything noteworthy."""

    token_count: int = 0
    items_total: int = 0
    items_failed: int = 0
    diagnostics: list[Diagnostic] = field(default_factory=list)
    duration: float = 0.0


def normalize_tag(key: str) -> str:
    """Turn an entry key into an XML-safe element name.

    Uppercases the key, replaces anything outside ``[A-Za-z0-9_]`` with
    an underscore, and prefixes ``X_`` when the result would not start
    with a letter. The result always matches ``[A-Z][A-Z0-9_]*``.
    """
    cleaned = re.sub(r"[^A-Za-z0-9_]", "_", key).upper()
    if not cleaned or not ("A" <= cleaned[0] <= "Z"):
        cleaned = "X_" + cleaned
    return cleaned


def build_context(
    doc: ReadmeAiDocument,
    checkout: Checkout | None = None,
    registry: HandlerRegistry | None = None,
    policy: CrawlPolicy | None = None,
    include_keys=None,
    *,
    lenient: bool = False,
    output_format: str = "xml",
) -> tuple[ContextTree, BuildReport]:
    """Assemble the context tree for *doc* and account for it.

    Entries are processed in document order, optionally filtered to
    *include_keys*. Text entries become text nodes; structured entries
    dispatch to their handler, and each successful item becomes a child
    tagged ``<stem><ordinal>`` (file1, link1, paper1, item1...). Failed
    items land in the report diagnostics, never in the tree.

    Raises BuildError only when at least one entry was selected and none
    could be processed; anything short of that is reported, not raised.
    """
    if output_format not in OUTPUT_FORMATS:
        raise ValueError(f"unknown output format {output_format!r}; expected one of {OUTPUT_FORMATS}")

    start = time.monotonic()
    diags: list[Diagnostic] = []
    reg = registry or default_registry()
    pol = policy or CrawlPolicy()

    selected = None if include_keys is None else set(include_keys)
    if selected is not None:
        for missing in sorted(selected.difference(doc.keys())):
            diags.append(
                Diagnostic("warning", _pointer(missing), "include key not present in document")
            )

    nodes: list[ContextNode] = []
    attempted = 0
    items_total = 0
    items_failed = 0

    for key, entry in doc.entries:
        if selected is not None and key not in selected:
            continue
        attempted += 1
        tag = normalize_tag(key)

        if entry.is_text:
            nodes.append(ContextNode(tag=tag, text=entry.text))
            continue

        items = dispatch(
            key,
            entry.structured,
            checkout,
            reg,
            pol,
            lenient=lenient,
            diagnostics=diags,
        )
        items_total += len(items)

        children: list[ContextChild] = []
        ordinals: dict[str, int] = {}
        for item in items:
            if item.failed:
                items_failed += 1
                diags.append(
                    Diagnostic("error", item.label, f"entry {key!r}: {item.error}")
                )
                continue
            if item.truncated:
                diags.append(
                    Diagnostic(
                        "warning",
                        item.label,
                        f"entry {key!r}: content truncated at the size cap",
                    )
                )
            stem = _STEM_BY_ORIGIN.get(item.origin, "item")
            ordinals[stem] = ordinals.get(stem, 0) + 1
            children.append(
                ContextChild(
                    tag=f"{stem}{ordinals[stem]}",
                    content=item.content,
                    description=item.description,
                )
            )
        if children:
            nodes.append(ContextNode(tag=tag, children=tuple(children)))

    tree = ContextTree(tuple(nodes))
    if attempted and not nodes:
        raise BuildError(
            f"no usable context: all {attempted} selected entries failed", diags
        )

    rendered = serialize(tree, output_format)
    report = BuildReport(
        token_count=count_tokens(rendered),
        items_total=items_total,
        items_failed=items_failed,
        diagnostics=diags,
        duration=time.monotonic() - start,
    )
    return tree, report


def serialize(tree: ContextTree, output_format: str = "xml") -> str:
    """Render the tree in the named format ("xml" or "markdown")."""
    if output_format == "xml":
        return serialize_xml(tree)
    if output_format == "markdown":
        return serialize_markdown(tree)
    raise ValueError(f"unknown output format {output_format!r}; expected one of {OUTPUT_FORMATS}")


# --- XML ---------------------------------------------------------------

def _clean_text(text: str) -> str:
    """Drop characters XML 1.0 cannot carry (control chars except tab/newline)."""
    return "".join(
        ch
        for ch in text
        if ch in "\t\n"
        or (ord(ch) >= 0x20 and not 0xD800 <= ord(ch) <= 0xDFFF and ord(ch) not in (0xFFFE, 0xFFFF))
    )


def _escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(text: str) -> str:
    return (
        _escape_text(text)
        .replace('"', "&quot;")
        .replace("\n", "&#10;")
        .replace("\t", "&#9;")
    )


def _framed(content: str, depth: int) -> str:
    """Indent every content line by the element depth.

    The framing is reversible: strip the leading/trailing newline, then
    remove exactly ``depth`` indent units from each line.
    """
    pad = _INDENT * depth
    return "\n" + "\n".join(pad + line for line in content.split("\n")) + "\n"


def serialize_xml(tree: ContextTree) -> str:
    """Render the tree as tagged, 4-space-indented, minimally escaped XML.

    The output is a sequence of sibling elements; wrapped in any single
    synthetic root element it parses with a conformant XML parser. An
    empty tree renders as the empty string.
    """
    blocks: list[str] = []
    for node in tree.nodes:
        if node.children:
            inner: list[str] = []
            for child in node.children:
                attr = (
                    f' description="{_escape_attr(_clean_text(child.description))}"'
                    if child.description is not None
                    else ""
                )
                body = _framed(_escape_text(_clean_text(child.content)), 2)
                inner.append(f"{_INDENT}<{child.tag}{attr}>{body}{_INDENT}</{child.tag}>")
            blocks.append(f"<{node.tag}>\n" + "\n".join(inner) + f"\n</{node.tag}>")
        else:
            body = _framed(_escape_text(_clean_text(node.text or "")), 1)
            blocks.append(f"<{node.tag}>{body}</{node.tag}>")
    return "\n".join(blocks)


# --- Markdown ----------------------------------------------------------

def _fence_for(content: str) -> str:
    longest = max((len(m.group()) for m in re.finditer(r"`+", content)), default=0)
    return "`" * max(3, longest + 1)


def serialize_markdown(tree: ContextTree) -> str:
    """Render the tree as Markdown: one level-1 heading per node, level-2
    per child, acquired content in fenced blocks."""
    parts: list[str] = []
    for node in tree.nodes:
        parts.append(f"# {node.tag}")
        if node.children:
            for child in node.children:
                parts.append(f"## {child.tag}")
                if child.description:
                    parts.append(f"> {child.description}")
                fence = _fence_for(child.content)
                parts.append(f"{fence}\n{child.content}\n{fence}")
        else:
            parts.append(node.text or "")
    return "\n\n".join(parts)


# --- Token accounting ---------------------------------------------------

def count_tokens(text: str) -> int:
    """Estimate the token count of *text*.

    Deliberately simple and model-agnostic: the number of whitespace-
    separated words plus one per punctuation or symbol character (Unicode
    categories P and S), since tokenizers typically split those out.
    An approximation, not any specific model's tokenizer.
    """
    words = len(text.split())
    symbols = sum(1 for ch in text if unicodedata.category(ch)[0] in ("P", "S"))
    return words + symbols
