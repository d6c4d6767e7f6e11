"""HTML to plain text conversion and hyperlink extraction.

Built on the standard library parser so crawling has no extra dependencies.
Scripts, styles, and templates are dropped; block-level elements become line
breaks; runs of inline whitespace collapse to single spaces.
"""

from __future__ import annotations

from html.parser import HTMLParser
from urllib.parse import urljoin

_SKIP_CONTENT = frozenset({"script", "style", "noscript", "template"})

_BLOCK_TAGS = frozenset(
    {
        "address", "article", "aside", "blockquote", "br", "dd", "div", "dl",
        "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1",
        "h2", "h3", "h4", "h5", "h6", "header", "hr", "li", "main", "nav",
        "ol", "p", "pre", "section", "table", "td", "th", "tr", "ul",
    }
)


class _Extractor(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.hrefs: list[str] = []
        self._chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_CONTENT:
            self._skip_depth += 1
            return
        if tag == "a":
            for name, value in attrs:
                if name == "href" and value:
                    self.hrefs.append(value)
        if tag in _BLOCK_TAGS:
            self._chunks.append("\n")

    def handle_endtag(self, tag):
        if tag in _SKIP_CONTENT:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag in _BLOCK_TAGS:
            self._chunks.append("\n")

    def handle_data(self, data):
        if self._skip_depth == 0 and data:
            self._chunks.append(data)

    def text(self) -> str:
        lines = []
        for raw_line in "".join(self._chunks).split("\n"):
            line = " ".join(raw_line.split())
            lines.append(line)
        # Collapse runs of blank lines left by nested block elements.
        out: list[str] = []
        for line in lines:
            if line or (out and out[-1]):
                out.append(line)
        return "\n".join(out).strip()


def extract_text_and_links(html: str, base_url: str = "") -> tuple[str, list[str]]:
    """Strip markup to text and collect absolute anchor targets.

    Relative hrefs are resolved against ``base_url``; only http/https
    results are returned, in document order, unnormalized.
    """
    parser = _Extractor()
    try:
        parser.feed(html)
        parser.close()
    except Exception:
        # The stdlib parser is forgiving; treat a hard failure as "no more
        # structure to extract" and keep whatever was gathered.
        pass
    links: list[str] = []
    for href in parser.hrefs:
        absolute = urljoin(base_url, href) if base_url else href
        if absolute.startswith(("http://", "https://")):
            links.append(absolute)
    return parser.text(), links


def extract_text(html: str) -> str:
    return extract_text_and_links(html)[0]
