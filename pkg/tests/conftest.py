"""Shared fixtures: loopback web site, git repositories, PDF bytes.

Everything runs offline: web content comes from a loopback HTTP server
(reachable under two authorities, 127.0.0.1 and localhost, so cross-host
policy rules are testable with one process) and repositories are local
git checkouts or plain directories.
"""

from __future__ import annotations

import io
import json
import os
import queue
import subprocess
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

#: A well-formed metadata file covering every value form the grammar allows:
#: plain text, described fetch paths, a glob list, and a crawl list.
SAMPLE_METADATA = """{
  "description": "A C++ library for embedded graph computation.",
  "source_files": {
    "data": {
      "/src/engine/graph.cpp": "Graph engine implementation",
      "/src/engine/node.cpp": "Node primitives"
    },
    "type": "fetch"
  },
  "api_files": {
    "data": ["/src/api/*"],
    "type": "fetch"
  },
  "documentation": {
    "data": ["https://docs.example.com/start"],
    "type": "crawl"
  }
}"""


@pytest.fixture(autouse=True)
def _isolated_dirs(tmp_path, monkeypatch):
    """Keep every test away from the user-level cache and registry."""
    monkeypatch.setenv("READMEAI_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.setenv("READMEAI_REGISTRY_PATH", str(tmp_path / "lookup.json"))


def make_pdf(lines: list[str]) -> bytes:
    from reportlab.pdfgen import canvas

    buf = io.BytesIO()
    c = canvas.Canvas(buf)
    text = c.beginText(72, 720)
    for line in lines:
        text.textLine(line)
    c.drawText(text)
    c.showPage()
    c.save()
    return buf.getvalue()


@pytest.fixture(scope="session")
def pdf_bytes() -> bytes:
    return make_pdf(["hello readme ai sentinel", "second line of the document"])


class FixtureSite:
    """Loopback site with a link cycle, a cross-host link, a PDF, and a 404."""

    def __init__(self, port: int, pdf: bytes, hits: list[str]):
        self.port = port
        self.pdf = pdf
        self.hits = hits
        self.base = f"http://127.0.0.1:{port}"
        # Same server, different authority: looks like another host to policy.
        self.alias_base = f"http://localhost:{port}"

    def url(self, path: str) -> str:
        return self.base + path


@pytest.fixture(scope="session")
def fixture_site(pdf_bytes):
    hits: list[str] = []
    site_box: dict = {}

    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            hits.append(self.path)
            site = site_box["site"]
            pages = {
                "/": (
                    "text/html",
                    '<html><body><h1>Fixture docs</h1>'
                    '<p>Welcome to the documentation root.</p>'
                    '<a href="/guide">guide</a> <a href="/api#anchor">api</a> '
                    '<a href="/">self</a> '
                    f'<a href="{site.alias_base}/other-host">elsewhere</a>'
                    "</body></html>",
                ),
                "/guide": (
                    "text/html",
                    '<html><body>Guide page body. <a href="/">home</a> '
                    '<a href="/api">api</a> <a href="/notes.txt">notes</a> '
                    '<a href="/missing">broken</a></body></html>',
                ),
                "/api": (
                    "text/html",
                    '<html><body>Api reference body. <a href="/guide">guide</a>'
                    "</body></html>",
                ),
                "/other-host": (
                    "text/html",
                    "<html><body>Cross-host page body.</body></html>",
                ),
                "/notes.txt": ("text/plain", "plain text notes"),
                "/page.txt": ("text/plain", "standalone text page"),
                "/binary.bin": ("application/octet-stream", None),
            }
            if self.path in pages:
                ctype, text = pages[self.path]
                body = b"\x00\x01binary" if text is None else text.encode("utf-8")
            elif self.path == "/doc.pdf":
                ctype, body = "application/pdf", site.pdf
            elif self.path == "/untyped.pdf":
                ctype, body = "", site.pdf
            elif self.path == "/huge":
                ctype, body = "text/html", b"<html><body>" + b"x" * (2 * 1024 * 1024)
            else:
                self.send_response(404)
                self.send_header("Content-Length", "0")
                self.end_headers()
                return
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    site = FixtureSite(server.server_address[1], pdf_bytes, hits)
    site_box["site"] = site
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield site
    server.shutdown()
    server.server_close()


def _git(args: list[str], cwd: Path) -> None:
    subprocess.run(
        ["git", *args],
        cwd=cwd,
        check=True,
        capture_output=True,
        env={**os.environ, "GIT_TERMINAL_PROMPT": "0"},
    )


@pytest.fixture
def make_git_repo(tmp_path_factory):
    """Factory: write files, git init + commit, return the repo root."""

    def make(files: dict[str, str | bytes], name: str = "fixture") -> Path:
        root = tmp_path_factory.mktemp(name)
        for rel, content in files.items():
            path = root / rel.lstrip("/")
            path.parent.mkdir(parents=True, exist_ok=True)
            if isinstance(content, bytes):
                path.write_bytes(content)
            else:
                path.write_text(content, encoding="utf-8")
        _git(["init", "-q", "-b", "main"], root)
        _git(["config", "user.email", "fixture@example.com"], root)
        _git(["config", "user.name", "Fixture"], root)
        _git(["add", "-A"], root)
        _git(["commit", "-qm", "fixture content"], root)
        return root

    return make


def full_repo_files(site: FixtureSite) -> dict[str, str]:
    """Repository content whose metadata exercises all three built-in tags."""
    metadata = {
        "description": "Fixture project for end-to-end context assembly.",
        "source_files": {
            "data": {
                "/src/core.py": "Core module",
                "/src/util.py": "Utility helpers",
            },
            "type": "fetch",
        },
        "api_files": {"data": ["/src/api/*"], "type": "fetch"},
        "documentation": {
            "data": {site.url("/"): "Documentation root"},
            "type": "crawl",
        },
        "reference_paper": {"data": [site.url("/doc.pdf")], "type": "download"},
    }
    return {
        "Readme_AI.json": json.dumps(metadata, indent=2),
        "src/core.py": "def core():\n    return 'core behavior'\n",
        "src/util.py": "def util():\n    return 'utility behavior'\n",
        "src/api/alpha.py": "def alpha():\n    return 'api alpha'\n",
        "src/api/beta.py": "def beta():\n    return 'api beta'\n",
        "README.md": "# fixture\n",
    }


@pytest.fixture
def full_repo(make_git_repo, fixture_site) -> Path:
    return make_git_repo(full_repo_files(fixture_site), name="full-repo")


def quick_policy(**overrides):
    from readme_ai.handlers import CrawlPolicy

    defaults = dict(request_delay=0.01, timeout=5.0)
    defaults.update(overrides)
    return CrawlPolicy(**defaults)


class StdioClient:
    """Scripted JSON-RPC client over a server subprocess's stdio."""

    def __init__(self, extra_args: list[str] | None = None, framing: str = "lines"):
        args = [
            sys.executable,
            "-m",
            "readme_ai",
            "serve",
            "--framing",
            framing,
            "--delay",
            "0.01",
            "--timeout",
            "5",
        ]
        args.extend(extra_args or [])
        self.framing = framing
        self.proc = subprocess.Popen(
            args,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            env=os.environ.copy(),
        )
        self._messages: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        out = self.proc.stdout
        while True:
            if self.framing == "headers":
                line = out.readline()
                if not line:
                    break
                if not line.strip():
                    continue
                headers = {}
                while line and line.strip():
                    name, _, value = line.decode().partition(":")
                    headers[name.strip().lower()] = value.strip()
                    line = out.readline()
                body = out.read(int(headers["content-length"]))
            else:
                body = out.readline()
                if not body:
                    break
            if body.strip():
                self._messages.put(json.loads(body))

    def send_raw(self, data: bytes) -> None:
        self.proc.stdin.write(data)
        self.proc.stdin.flush()

    def send(self, payload: dict) -> None:
        data = json.dumps(payload).encode()
        if self.framing == "headers":
            self.send_raw(b"Content-Length: %d\r\n\r\n%s" % (len(data), data))
        else:
            self.send_raw(data + b"\n")

    def request(self, req_id, method: str, params: dict | None = None) -> None:
        msg = {"jsonrpc": "2.0", "id": req_id, "method": method}
        if params is not None:
            msg["params"] = params
        self.send(msg)

    def recv(self, timeout: float = 60.0) -> dict:
        return self._messages.get(timeout=timeout)

    def recv_by_id(self, ids: set, timeout: float = 60.0) -> dict:
        """Collect responses until every id in *ids* has arrived."""
        got: dict = {}
        while set(got) != set(ids):
            msg = self.recv(timeout)
            got[msg.get("id")] = msg
        return got

    def close(self, timeout: float = 30.0) -> int:
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=timeout)
        self._reader.join(timeout=5)
        return self.proc.returncode


@pytest.fixture
def stdio_client():
    clients: list[StdioClient] = []

    def make(extra_args=None, framing="lines") -> StdioClient:
        client = StdioClient(extra_args, framing=framing)
        clients.append(client)
        return client

    yield make
    for client in clients:
        if client.proc.poll() is None:
            try:
                client.proc.stdin.close()
            except OSError:
                pass
            try:
                client.proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                client.proc.kill()
