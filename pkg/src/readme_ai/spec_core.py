"""Document model, parser, and validator for Readme_AI.json files.

A Readme_AI.json file is a single JSON object. Each key names a metadata
category; each value is either a plain string or a structured object of the
form ``{"data": <string | list of strings | object of string: string>,
"type": "<tag>"}``. The parser is total: malformed input never raises, it
returns diagnostics that locate every problem found.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

#: Type tags with built-in acquisition handlers.
BUILTIN_TAGS = frozenset({"fetch", "crawl", "download"})

#: Defensive bound on input size; configurable per call.
DEFAULT_MAX_SIZE_BYTES = 10 * 1024 * 1024


@dataclass(frozen=True)
class Diagnostic:
    """One problem found while parsing or validating a document.

    ``path`` is a JSON-pointer-style location of the offending node
    ("" means the document root). Diagnostics produced later in the
    pipeline reuse this type with ``path`` set to the data element
    (a file path or URL) the problem applies to.
    """

    severity: str  # "error" or "warning"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}:{self.path}:{self.message}"


def _pointer(*tokens) -> str:
    """Build a JSON pointer from path tokens, escaping per RFC 6901."""
    out = []
    for tok in tokens:
        tok = str(tok).replace("~", "~0").replace("/", "~1")
        out.append("/" + tok)
    return "".join(out)


@dataclass(frozen=True)
class DataSpec:
    """The ``data`` field of a structured object.

    Two source forms exist: a list of strings (``described`` is False,
    all descriptions are None) and an object mapping each string to a
    description (``described`` is True). Source order is preserved.
    A bare string in the source is normalized to a one-element list.
    """

    targets: tuple[str, ...]
    descriptions: tuple[str | None, ...]
    described: bool = False

    def __post_init__(self):
        if len(self.targets) != len(self.descriptions):
            raise ValueError("targets and descriptions must be parallel")

    def pairs(self) -> list[tuple[str, str | None]]:
        return list(zip(self.targets, self.descriptions))

    @classmethod
    def from_items(cls, items) -> "DataSpec":
        items = tuple(items)
        return cls(items, (None,) * len(items), described=False)

    @classmethod
    def from_described(cls, pairs) -> "DataSpec":
        pairs = list(pairs)
        return cls(
            tuple(k for k, _ in pairs),
            tuple(v for _, v in pairs),
            described=True,
        )


@dataclass(frozen=True)
class StructuredObject:
    """A ``{"data": ..., "type": ...}`` value. ``type_tag`` is stored lowercase."""

    data: DataSpec
    type_tag: str


@dataclass(frozen=True)
class Entry:
    """One document value: plain text or a structured object, never both."""

    text: str | None = None
    structured: StructuredObject | None = None

    def __post_init__(self):
        if (self.text is None) == (self.structured is None):
            raise ValueError("exactly one of text/structured must be set")

    @property
    def is_text(self) -> bool:
        return self.text is not None


@dataclass
class ReadmeAiDocument:
    """A parsed Readme_AI.json: ordered, uniquely-keyed entries.

    ``source_path`` records where the file came from and is excluded from
    equality so round-tripped documents compare structurally.
    """

    entries: tuple[tuple[str, Entry], ...]
    source_path: str = field(default="", compare=False)

    def keys(self) -> list[str]:
        return [k for k, _ in self.entries]

    def get(self, key: str) -> Entry | None:
        for k, entry in self.entries:
            if k == key:
                return entry
        return None

    def __len__(self) -> int:
        return len(self.entries)


class _Pairs(list):
    """Marker for JSON objects decoded as ordered (key, value) pairs."""


def parse_document(
    text: str,
    source_path: str = "<memory>",
    max_size_bytes: int = DEFAULT_MAX_SIZE_BYTES,
) -> tuple[ReadmeAiDocument | None, list[Diagnostic]]:
    """Parse Readme_AI.json content into a document model.

    Returns ``(document, [])`` on success and ``(None, diagnostics)`` on
    failure, reporting every problem found rather than stopping at the
    first. Never raises on malformed input.
    """
    diags: list[Diagnostic] = []

    if len(text.encode("utf-8", errors="replace")) > max_size_bytes:
        diags.append(
            Diagnostic(
                "error",
                "",
                f"file exceeds the maximum size of {max_size_bytes} bytes",
            )
        )
        return None, diags

    try:
        root = json.loads(text, object_pairs_hook=_Pairs)
    except json.JSONDecodeError as exc:
        diags.append(
            Diagnostic(
                "error",
                "",
                f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}",
            )
        )
        return None, diags

    if not isinstance(root, _Pairs):
        diags.append(
            Diagnostic(
                "error",
                "",
                f"top level must be a JSON object, not {_type_name(root)}",
            )
        )
        return None, diags

    entries: list[tuple[str, Entry]] = []
    seen_keys: set[str] = set()
    for key, value in root:
        path = _pointer(key)
        if key in seen_keys:
            diags.append(Diagnostic("error", path, f"duplicate key {key!r}"))
            continue
        seen_keys.add(key)

        entry = _parse_value(value, path, diags)
        if entry is not None:
            entries.append((key, entry))

    if any(d.severity == "error" for d in diags):
        return None, diags
    return ReadmeAiDocument(tuple(entries), source_path=source_path), diags


def _parse_value(value, path: str, diags: list[Diagnostic]) -> Entry | None:
    if isinstance(value, str):
        return Entry(text=value)
    if isinstance(value, _Pairs):
        obj = _parse_structured(value, path, diags)
        return None if obj is None else Entry(structured=obj)
    diags.append(
        Diagnostic(
            "error",
            path,
            f"value must be a string or a structured object, not {_type_name(value)}",
        )
    )
    return None


def _parse_structured(pairs: _Pairs, path: str, diags: list[Diagnostic]) -> StructuredObject | None:
    fields: dict[str, object] = {}
    ok = True
    for fkey, fval in pairs:
        if fkey in fields:
            diags.append(Diagnostic("error", path, f"duplicate field {fkey!r}"))
            ok = False
            continue
        fields[fkey] = fval
    # Unknown extra fields are tolerated so future additions to the format
    # do not break older tools; only data/type are interpreted.

    if "data" not in fields:
        diags.append(Diagnostic("error", path, "missing required field `data`"))
        ok = False
    if "type" not in fields:
        diags.append(Diagnostic("error", path, "missing required field `type`"))
        ok = False
    if not ok:
        return None

    data = _parse_data(fields["data"], path, diags)

    type_tag = None
    raw_tag = fields["type"]
    if not isinstance(raw_tag, str) or not raw_tag.strip():
        diags.append(
            Diagnostic(
                "error",
                path + "/type",
                "field `type` must be a non-empty string",
            )
        )
    else:
        type_tag = raw_tag.strip().lower()

    if data is None or type_tag is None:
        return None
    return StructuredObject(data=data, type_tag=type_tag)


def _parse_data(value, path: str, diags: list[Diagnostic]) -> DataSpec | None:
    data_path = path + "/data"

    if isinstance(value, str):
        # A bare string is accepted as a one-element list.
        if not value:
            diags.append(Diagnostic("error", data_path, "data string must not be empty"))
            return None
        return DataSpec.from_items([value])

    if isinstance(value, _Pairs):
        if not value:
            diags.append(Diagnostic("error", data_path, "data object must not be empty"))
            return None
        ok = True
        seen: set[str] = set()
        pairs: list[tuple[str, str]] = []
        for dkey, dval in value:
            dpath = data_path + _pointer(dkey)
            if dkey in seen:
                diags.append(Diagnostic("error", dpath, f"duplicate data key {dkey!r}"))
                ok = False
                continue
            seen.add(dkey)
            if not dkey:
                diags.append(Diagnostic("error", dpath, "data key must not be empty"))
                ok = False
                continue
            if not isinstance(dval, str):
                diags.append(
                    Diagnostic(
                        "error",
                        dpath,
                        f"description must be a string, not {_type_name(dval)}",
                    )
                )
                ok = False
                continue
            pairs.append((dkey, dval))
        return DataSpec.from_described(pairs) if ok else None

    if isinstance(value, list):
        if not value:
            diags.append(Diagnostic("error", data_path, "data list must not be empty"))
            return None
        ok = True
        items: list[str] = []
        for i, item in enumerate(value):
            ipath = f"{data_path}/{i}"
            if not isinstance(item, str):
                diags.append(
                    Diagnostic(
                        "error",
                        ipath,
                        f"data entries must be strings, not {_type_name(item)}",
                    )
                )
                ok = False
                continue
            if not item:
                diags.append(Diagnostic("error", ipath, "data entry must not be empty"))
                ok = False
                continue
            items.append(item)
        return DataSpec.from_items(items) if ok else None

    diags.append(
        Diagnostic(
            "error",
            data_path,
            "field `data` must be a string, a list of strings, "
            f"or an object of string descriptions, not {_type_name(value)}",
        )
    )
    return None


def _type_name(value) -> str:
    if isinstance(value, _Pairs):
        return "object"
    return {
        str: "string",
        bool: "boolean",
        int: "number",
        float: "number",
        list: "array",
        type(None): "null",
    }.get(type(value), type(value).__name__)


def validate_document(
    doc: ReadmeAiDocument,
    known_tags: frozenset[str] | set[str] = BUILTIN_TAGS,
) -> list[Diagnostic]:
    """Lint a parsed document. Advisory only: returns warnings, never errors.

    Flags structured entries whose type tag has no known handler (they will
    fail at dispatch unless a custom handler is registered) and described
    data entries with empty descriptions.
    """
    warnings: list[Diagnostic] = []
    for key, entry in doc.entries:
        if entry.is_text:
            continue
        obj = entry.structured
        if obj.type_tag not in known_tags:
            warnings.append(
                Diagnostic(
                    "warning",
                    _pointer(key) + "/type",
                    f"type tag {obj.type_tag!r} has no registered handler; "
                    "dispatch will fail unless a custom handler is added",
                )
            )
        if obj.data.described:
            for target, desc in obj.data.pairs():
                if desc == "":
                    warnings.append(
                        Diagnostic(
                            "warning",
                            _pointer(key) + "/data" + _pointer(target),
                            "empty description",
                        )
                    )
    return warnings


def to_canonical_json(doc: ReadmeAiDocument) -> str:
    """Serialize the model back to canonical JSON.

    Canonical form always writes ``data`` as a list or object (a bare
    source string becomes a one-element list). Re-parsing the output
    yields a structurally equal document.
    """
    out: dict[str, object] = {}
    for key, entry in doc.entries:
        if entry.is_text:
            out[key] = entry.text
        else:
            obj = entry.structured
            if obj.data.described:
                data: object = {k: v for k, v in obj.data.pairs()}
            else:
                data = list(obj.data.targets)
            out[key] = {"data": data, "type": obj.type_tag}
    return json.dumps(out, ensure_ascii=False, indent=2)
