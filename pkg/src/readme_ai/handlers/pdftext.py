"""Minimal PDF text extraction.

Good enough for text-first documents: walks every stream in the file,
undoes ASCII85/Flate encodings, and replays the text-showing operators
(Tj, TJ, ', ") from any stream that looks like a content stream. Image
and font streams are ignored. The extractor is deliberately small and
swappable; callers needing higher fidelity can pass their own extractor
to the download handler.
"""

from __future__ import annotations

import base64
import re
import zlib

_STREAM_START = re.compile(rb"(?<!end)stream\r?\n")
_ESCAPES = {
    ord("n"): b"\n",
    ord("r"): b"\r",
    ord("t"): b"\t",
    ord("b"): b"\b",
    ord("f"): b"\f",
    ord("("): b"(",
    ord(")"): b")",
    ord("\\"): b"\\",
}

#: Operators that end a visual line; used to keep words from running together.
_NEWLINE_OPS = frozenset({b"Td", b"TD", b"T*", b"Tm", b"ET"})
_SHOW_OPS = frozenset({b"Tj", b"'", b'"'})


class PdfExtractionError(ValueError):
    """The payload is not a readable PDF."""


def extract_pdf_text(data: bytes) -> str:
    """Extract the text content of a PDF payload.

    Raises PdfExtractionError when the payload lacks the PDF magic or its
    content streams are corrupt beyond use. A well-formed PDF with no text
    returns the empty string.
    """
    if not data.lstrip()[:5].startswith(b"%PDF"):
        raise PdfExtractionError("payload does not start with the PDF magic bytes")

    parts: list[str] = []
    decode_failures = 0
    for stream in _iter_streams(data):
        if stream is None:
            decode_failures += 1
            continue
        if b"BT" not in stream:
            continue
        parts.extend(_extract_from_content(stream))

    if not parts and decode_failures:
        raise PdfExtractionError("no readable content streams (corrupt file?)")

    text = "\n".join(parts)
    return re.sub(r"\n{3,}", "\n\n", text).strip()


def _iter_streams(data: bytes):
    """Yield decoded stream payloads; None for a stream that fails to decode."""
    for match in _STREAM_START.finditer(data):
        start = match.end()
        end = data.find(b"endstream", start)
        if end < 0:
            yield None
            continue
        objpos = data.rfind(b"obj", 0, match.start())
        header = data[max(objpos, 0) : match.start()]
        raw = data[start:end].rstrip(b"\r\n")
        try:
            if b"ASCII85Decode" in header:
                raw = base64.a85decode(raw, adobe=True, ignorechars=b" \t\r\n")
            if b"FlateDecode" in header:
                raw = zlib.decompress(raw)
        except (ValueError, zlib.error):
            yield None
            continue
        yield raw


def _decode_pdf_string(raw: bytes) -> str:
    if raw.startswith(b"\xfe\xff"):
        return raw.decode("utf-16-be", errors="replace")
    # Simple fonts use byte codes; latin-1 keeps the ASCII range intact.
    return raw.decode("latin-1", errors="replace")


def _extract_from_content(stream: bytes) -> list[str]:
    """Replay text operators from one content stream."""
    out: list[str] = []
    line: list[str] = []
    operands: list[object] = []
    array: list[object] | None = None
    i = 0
    n = len(stream)

    def flush_line():
        if line:
            text = "".join(line).strip()
            if text:
                out.append(text)
            line.clear()

    while i < n:
        c = stream[i : i + 1]
        if c in b" \t\r\n\x00":
            i += 1
        elif c == b"%":
            nl = stream.find(b"\n", i)
            i = n if nl < 0 else nl + 1
        elif c == b"(":
            value, i = _parse_literal_string(stream, i)
            (array if array is not None else operands).append(value)
        elif c == b"<" and stream[i : i + 2] != b"<<":
            value, i = _parse_hex_string(stream, i)
            (array if array is not None else operands).append(value)
        elif stream[i : i + 2] in (b"<<", b">>"):
            i += 2
        elif c == b"[":
            array = []
            i += 1
        elif c == b"]":
            operands.append(array if array is not None else [])
            array = None
            i += 1
        elif c == b"/":
            j = i + 1
            while j < n and stream[j : j + 1] not in b" \t\r\n()<>[]{}/%":
                j += 1
            i = j
        else:
            j = i
            while j < n and stream[j : j + 1] not in b" \t\r\n()<>[]{}/%":
                j += 1
            token = stream[i:j]
            i = j if j > i else i + 1
            if not token:
                continue
            if _is_number(token):
                operands.append(float(token))
            else:
                _apply_operator(token, operands, line, flush_line)
                operands.clear()

    flush_line()
    return out


def _apply_operator(op: bytes, operands, line, flush_line) -> None:
    if op in _SHOW_OPS:
        if op != b"Tj":
            flush_line()
        for operand in reversed(operands):
            if isinstance(operand, bytes):
                line.append(_decode_pdf_string(operand))
                break
    elif op == b"TJ":
        for operand in reversed(operands):
            if isinstance(operand, list):
                for element in operand:
                    if isinstance(element, bytes):
                        line.append(_decode_pdf_string(element))
                break
    elif op in _NEWLINE_OPS:
        flush_line()


def _parse_literal_string(stream: bytes, i: int) -> tuple[bytes, int]:
    assert stream[i : i + 1] == b"("
    i += 1
    depth = 1
    buf = bytearray()
    n = len(stream)
    while i < n and depth > 0:
        b = stream[i]
        if b == 0x5C:  # backslash
            i += 1
            if i >= n:
                break
            e = stream[i]
            if e in _ESCAPES:
                buf += _ESCAPES[e]
                i += 1
            elif 0x30 <= e <= 0x37:  # octal escape, up to 3 digits
                digits = bytearray()
                while i < n and len(digits) < 3 and 0x30 <= stream[i] <= 0x37:
                    digits.append(stream[i])
                    i += 1
                buf.append(int(digits, 8) & 0xFF)
            elif e in (0x0A, 0x0D):  # line continuation
                i += 1
                if e == 0x0D and i < n and stream[i] == 0x0A:
                    i += 1
            else:
                buf.append(e)
                i += 1
        elif b == 0x28:  # (
            depth += 1
            buf.append(b)
            i += 1
        elif b == 0x29:  # )
            depth -= 1
            if depth > 0:
                buf.append(b)
            i += 1
        else:
            buf.append(b)
            i += 1
    return bytes(buf), i


def _parse_hex_string(stream: bytes, i: int) -> tuple[bytes, int]:
    assert stream[i : i + 1] == b"<"
    end = stream.find(b">", i + 1)
    if end < 0:
        end = len(stream)
    digits = re.sub(rb"[^0-9A-Fa-f]", b"", stream[i + 1 : end])
    if len(digits) % 2:
        digits += b"0"
    try:
        return bytes.fromhex(digits.decode("ascii")), end + 1
    except ValueError:
        return b"", end + 1


def _is_number(token: bytes) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False
