"""JSON-RPC 2.0 tool server exposing the context builder.

Speaks the Model Context Protocol tool-calling conventions over stdio
(newline-delimited by default, Content-Length framing on request) or an
optional local HTTP POST endpoint for testing. One tool is exposed,
``readme_ai``: resolve a URL or registered name, acquire the source,
build its context, and return the serialized result.

Data-layer failures (bad source, missing or invalid metadata file, build
errors) come back as tool results with ``isError`` set, so a calling LLM
can read the explanation; only malformed requests and unknown methods or
tools produce JSON-RPC protocol errors.
"""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path

from ._version import __version__
from .errors import ReadmeAiError
from .handlers import CrawlPolicy, HandlerRegistry
from .pipeline import run_build
from .sources import Registry, default_cache_dir, default_registry_path

logger = logging.getLogger(__name__)

TOOL_NAME = "readme_ai"
PROTOCOL_VERSION = "2024-11-05"

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603

#: Upper bound on one framed message; guards the Content-Length reader.
MAX_FRAME_BYTES = 64 * 1024 * 1024


class UnknownToolError(Exception):
    """tools/call named a tool this server does not host."""


class InvalidParamsError(Exception):
    """Request parameters violate the tool schema."""


class _DeadlineExceeded(Exception):
    def __init__(self, stage: str, completed: list[str]):
        self.stage = stage
        self.completed = completed
        super().__init__(stage)


def load_tool_description() -> str:
    """The readme_ai tool description shipped as a package resource."""
    try:
        return (
            resources.files("readme_ai").joinpath("tool_description.txt").read_text("utf-8")
        )
    except (FileNotFoundError, ModuleNotFoundError):
        return (Path(__file__).parent / "tool_description.txt").read_text("utf-8")


def tool_schema() -> dict:
    """JSON-Schema description of the readme_ai tool."""
    return {
        "name": TOOL_NAME,
        "description": load_tool_description(),
        "inputSchema": {
            "type": "object",
            "properties": {
                "url_or_name": {
                    "type": "string",
                    "description": (
                        "Repository URL (http, https, or file scheme) or a "
                        "short name registered with this server."
                    ),
                },
                "include_keys": {
                    "type": "array",
                    "items": {"type": "string"},
                    "description": "Restrict the output to these metadata entry keys.",
                },
                "format": {
                    "type": "string",
                    "enum": ["xml", "markdown"],
                    "description": "Output format; defaults to xml.",
                },
            },
            "required": ["url_or_name"],
        },
    }


@dataclass
class ToolResult:
    """Outcome of one tool call: the context (or failure text) plus accounting."""

    content: str
    is_error: bool = False
    report: dict = field(default_factory=dict)

    def to_mcp(self) -> dict:
        return {
            "content": [{"type": "text", "text": self.content}],
            "isError": self.is_error,
            "_meta": {"report": self.report},
        }


@dataclass
class ServerConfig:
    cache_dir: str | Path | None = None
    registry_path: str | Path | None = None
    policy: CrawlPolicy | None = None
    handler_registry: HandlerRegistry | None = None
    lenient: bool = False
    framing: str = "lines"  # "lines" or "headers"
    max_workers: int = 4
    call_deadline: float = 120.0


def _ok(req_id, result: dict) -> dict:
    return {"jsonrpc": "2.0", "id": req_id, "result": result}


def _err(req_id, code: int, message: str) -> dict:
    return {"jsonrpc": "2.0", "id": req_id, "error": {"code": code, "message": message}}


class ReadmeAiServer:
    """One server instance: shared registry, cache, and crawl policy."""

    def __init__(self, config: ServerConfig | None = None):
        self.config = config or ServerConfig()
        self.registry = Registry(self.config.registry_path or default_registry_path())
        self.cache_dir = Path(self.config.cache_dir or default_cache_dir())
        self.policy = self.config.policy or CrawlPolicy()

    # -- tool layer -----------------------------------------------------

    def list_tools(self) -> list[dict]:
        return [tool_schema()]

    def call_tool(self, name: str, arguments: dict) -> ToolResult:
        """Run one tool call under the configured deadline.

        Raises UnknownToolError / InvalidParamsError for protocol-level
        problems; every data-layer failure becomes an is_error result.
        """
        if name != TOOL_NAME:
            raise UnknownToolError(name)
        args = self._validated_args(arguments)
        try:
            outcome = self._run_with_deadline(args)
        except _DeadlineExceeded as exc:
            done = ", ".join(exc.completed[:-1]) or "(none)"
            return ToolResult(
                content=(
                    f"deadline of {self.config.call_deadline:g}s exceeded during "
                    f"stage {exc.stage!r}; completed stages: {done}"
                ),
                is_error=True,
            )
        except ReadmeAiError as exc:
            lines = [str(exc)]
            lines.extend(str(d) for d in getattr(exc, "diagnostics", []))
            return ToolResult(content="\n".join(lines), is_error=True)
        except Exception as exc:  # noqa: BLE001 — transport must stay alive
            logger.exception("tool call failed unexpectedly")
            return ToolResult(content=f"unexpected error: {exc}", is_error=True)

        report = outcome.report
        return ToolResult(
            content=outcome.content,
            report={
                "token_count": report.token_count,
                "items_total": report.items_total,
                "items_failed": report.items_failed,
                "duration": round(report.duration, 3),
                "warnings": sum(
                    1 for d in report.diagnostics if d.severity == "warning"
                ),
                "errors": sum(1 for d in report.diagnostics if d.severity == "error"),
            },
        )

    @staticmethod
    def _validated_args(arguments) -> dict:
        if not isinstance(arguments, dict):
            raise InvalidParamsError("arguments must be an object")
        if "url_or_name" not in arguments:
            raise InvalidParamsError("missing required argument `url_or_name`")
        url_or_name = arguments["url_or_name"]
        if not isinstance(url_or_name, str):
            raise InvalidParamsError("`url_or_name` must be a string")
        include_keys = arguments.get("include_keys")
        if include_keys is not None and (
            not isinstance(include_keys, list)
            or any(not isinstance(k, str) for k in include_keys)
        ):
            raise InvalidParamsError("`include_keys` must be a list of strings")
        output_format = arguments.get("format", "xml")
        if output_format not in ("xml", "markdown"):
            raise InvalidParamsError("`format` must be \"xml\" or \"markdown\"")
        return {
            "url_or_name": url_or_name,
            "include_keys": include_keys,
            "output_format": output_format,
        }

    def _run_with_deadline(self, args: dict):
        stages: list[str] = []
        box: dict = {}

        def target():
            try:
                box["outcome"] = run_build(
                    args["url_or_name"],
                    cache_dir=self.cache_dir,
                    registry=self.registry,
                    handler_registry=self.config.handler_registry,
                    policy=self.policy,
                    include_keys=args["include_keys"],
                    output_format=args["output_format"],
                    lenient=self.config.lenient,
                    on_stage=stages.append,
                )
            except BaseException as exc:  # re-raised on the caller's thread
                box["error"] = exc

        worker = threading.Thread(target=target, daemon=True, name="readme-ai-build")
        worker.start()
        worker.join(self.config.call_deadline)
        if worker.is_alive():
            raise _DeadlineExceeded(stages[-1] if stages else "start", stages)
        if "error" in box:
            raise box["error"]
        return box["outcome"]

    # -- JSON-RPC layer ---------------------------------------------------

    def handle_message(self, msg) -> dict | None:
        """Dispatch one decoded JSON-RPC message; None for notifications."""
        if not isinstance(msg, dict):
            return _err(None, INVALID_REQUEST, "request must be a JSON object")
        if "id" not in msg:
            self._handle_notification(str(msg.get("method")))
            return None
        req_id = msg.get("id")
        if msg.get("jsonrpc") != "2.0":
            return _err(req_id, INVALID_REQUEST, 'missing "jsonrpc": "2.0"')
        method = msg.get("method")
        if not isinstance(method, str):
            return _err(req_id, INVALID_REQUEST, "method must be a string")
        params = msg.get("params") or {}
        if not isinstance(params, dict):
            return _err(req_id, INVALID_PARAMS, "params must be an object")

        if method == "initialize":
            requested = params.get("protocolVersion")
            return _ok(
                req_id,
                {
                    "protocolVersion": requested
                    if isinstance(requested, str) and requested
                    else PROTOCOL_VERSION,
                    "capabilities": {"tools": {"listChanged": False}},
                    "serverInfo": {"name": "readme-ai", "version": __version__},
                },
            )
        if method == "ping":
            return _ok(req_id, {})
        if method == "tools/list":
            return _ok(req_id, {"tools": self.list_tools()})
        if method == "tools/call":
            name = params.get("name")
            if not isinstance(name, str):
                return _err(req_id, INVALID_PARAMS, "tool name must be a string")
            try:
                result = self.call_tool(name, params.get("arguments", {}))
            except UnknownToolError:
                return _err(req_id, INVALID_PARAMS, f"unknown tool {name!r}")
            except InvalidParamsError as exc:
                return _err(req_id, INVALID_PARAMS, str(exc))
            return _ok(req_id, result.to_mcp())
        return _err(req_id, METHOD_NOT_FOUND, f"unknown method {method!r}")

    @staticmethod
    def _handle_notification(method: str) -> None:
        # Notifications never get a response, even unknown ones.
        logger.debug("notification: %s", method)

    # -- transports -------------------------------------------------------

    def serve_stdio(self, stdin=None, stdout=None) -> int:
        """Serve until end-of-input; returns the process exit code.

        Requests run on a bounded worker pool; responses are written under
        a lock and may interleave out of request order. In-flight calls
        are drained before returning.
        """
        import sys

        raw_in = stdin if stdin is not None else sys.stdin.buffer
        raw_out = stdout if stdout is not None else sys.stdout.buffer
        write_lock = threading.Lock()
        use_headers = self.config.framing == "headers"

        def send(payload: dict) -> None:
            data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            try:
                with write_lock:
                    if use_headers:
                        raw_out.write(b"Content-Length: %d\r\n\r\n" % len(data))
                        raw_out.write(data)
                    else:
                        raw_out.write(data + b"\n")
                    raw_out.flush()
            except OSError:
                logger.warning("output stream closed; dropping response")

        def respond(msg) -> None:
            response = self.handle_message(msg)
            if response is not None:
                send(response)

        with ThreadPoolExecutor(
            max_workers=self.config.max_workers, thread_name_prefix="readme-ai"
        ) as pool:
            try:
                while True:
                    if use_headers:
                        payload = _read_header_frame(raw_in, send)
                    else:
                        payload = _read_line_frame(raw_in)
                    if payload is None:
                        break
                    try:
                        msg = json.loads(payload.decode("utf-8", errors="replace"))
                    except json.JSONDecodeError as exc:
                        send(_err(None, PARSE_ERROR, f"parse error: {exc.msg}"))
                        continue
                    if isinstance(msg, dict) and "id" not in msg:
                        respond(msg)  # notification: fast, handled inline
                        continue
                    pool.submit(respond, msg)
            except KeyboardInterrupt:
                logger.info("interrupted; draining in-flight calls")
        return 0

    def make_http_server(self, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
        """Local HTTP transport: one JSON-RPC message per POST body."""
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):  # noqa: N802 — http.server API
                try:
                    length = int(self.headers.get("Content-Length", 0))
                except ValueError:
                    length = 0
                body = self.rfile.read(min(length, MAX_FRAME_BYTES))
                try:
                    msg = json.loads(body.decode("utf-8", errors="replace"))
                except json.JSONDecodeError as exc:
                    response = _err(None, PARSE_ERROR, f"parse error: {exc.msg}")
                else:
                    response = outer.handle_message(msg)
                if response is None:  # notification
                    self.send_response(202)
                    self.send_header("Content-Length", "0")
                    self.end_headers()
                    return
                data = json.dumps(response, ensure_ascii=False).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):  # quiet; stdio may be protocol surface
                logger.debug("http: %s", args)

        return ThreadingHTTPServer((host, port), Handler)


def _read_line_frame(stream) -> bytes | None:
    """Next non-empty line, or None at end of input."""
    while True:
        line = stream.readline()
        if not line:
            return None
        line = line.strip()
        if line:
            return line


def _read_header_frame(stream, send) -> bytes | None:
    """Next Content-Length-framed body, or None at end of input.

    A header block without a usable Content-Length gets a parse-error
    response (via *send*) and reading continues with the next block.
    """
    while True:
        line = stream.readline()
        if not line:
            return None
        if not line.strip():
            continue
        headers = {}
        while line and line.strip():
            name, _, value = line.decode("latin-1").partition(":")
            headers[name.strip().lower()] = value.strip()
            line = stream.readline()
        try:
            length = int(headers["content-length"])
            if not 0 <= length <= MAX_FRAME_BYTES:
                raise ValueError(length)
        except (KeyError, ValueError):
            send(_err(None, PARSE_ERROR, "missing or invalid Content-Length header"))
            continue
        body = stream.read(length)
        if body is None or len(body) < length:
            return None
        return body
