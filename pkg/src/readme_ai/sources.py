"""Resolve user input to a data source, cache clones, and find its Readme_AI.json.

A source is referred to either by URL (http, https, or file scheme) or by a
short name previously stored in the lookup registry. URLs given directly are
auto-registered under a name derived from their final path segment, so later
queries can use the short name instead of the full link.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlsplit
from urllib.request import url2pathname

from .errors import AcquisitionError, RegistryCollisionError, SourceResolutionError, SpecMissingError

logger = logging.getLogger(__name__)

SPEC_FILENAME = "Readme_AI.json"

#: Environment variables honored when no explicit path is given.
ENV_CACHE_DIR = "READMEAI_CACHE_DIR"
ENV_REGISTRY_PATH = "READMEAI_REGISTRY_PATH"

_URL_SCHEMES = frozenset({"http", "https", "file"})

# Serializes acquisition per cache directory so concurrent calls for the
# same URL coalesce instead of racing on the clone.
_ACQUIRE_LOCKS: dict[str, threading.Lock] = {}
_ACQUIRE_LOCKS_GUARD = threading.Lock()


def default_data_dir() -> Path:
    base = os.environ.get("XDG_DATA_HOME", "~/.local/share")
    return Path(base).expanduser() / "readme_ai"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_CACHE_DIR)
    return Path(env) if env else default_data_dir() / "cache"


def default_registry_path() -> Path:
    env = os.environ.get(ENV_REGISTRY_PATH)
    return Path(env) if env else default_data_dir() / "lookup.json"


@dataclass(frozen=True)
class SourceRef:
    """Classified user input: a URL or a registered short name."""

    raw: str
    kind: str  # "url" or "name"


def classify_source(raw: str) -> SourceRef:
    """Classify user input. URLs are absolute with an http/https/file scheme."""
    raw = raw.strip()
    parts = urlsplit(raw)
    if parts.scheme in _URL_SCHEMES and (parts.netloc or parts.path):
        return SourceRef(raw, "url")
    return SourceRef(raw, "name")


def derive_name(url: str) -> str:
    """Derive a registry name from a URL: final path segment, ``.git`` stripped, lowercased."""
    path = urlsplit(url).path
    segment = path.rstrip("/").rsplit("/", 1)[-1]
    if segment.endswith(".git"):
        segment = segment[: -len(".git")]
    return segment.lower()


class Registry:
    """Persisted name-to-URL lookup map.

    The backing file is a flat JSON object written atomically after every
    mutation. Names are stored lowercase so lookups are case-insensitive.
    """

    def __init__(self, storage_path: str | Path):
        self.storage_path = Path(storage_path)
        self._entries: dict[str, str] = {}
        self._lock = threading.Lock()
        self._load()

    def _load(self) -> None:
        if not self.storage_path.exists():
            return
        raw = json.loads(self.storage_path.read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise SourceResolutionError(
                f"registry file {self.storage_path} is not a JSON object"
            )
        self._entries = {str(k).lower(): str(v) for k, v in raw.items()}

    def _persist(self) -> None:
        self.storage_path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(
            dir=self.storage_path.parent, prefix=".lookup-", suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(self._entries, fh, ensure_ascii=False, indent=2)
                fh.write("\n")
            os.replace(tmp, self.storage_path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def register(self, name: str, url: str, overwrite: bool = False) -> None:
        """Store a name-to-URL mapping and persist it.

        Re-registering the same pair is a no-op; binding an existing name
        to a different URL raises unless ``overwrite`` is set.
        """
        name = name.strip().lower()
        if not name:
            raise SourceResolutionError("cannot register an empty name")
        with self._lock:
            existing = self._entries.get(name)
            if existing == url:
                return
            if existing is not None and not overwrite:
                raise RegistryCollisionError(
                    f"name {name!r} is already registered to {existing} "
                    "(pass overwrite to replace it)"
                )
            self._entries[name] = url
            self._persist()

    def lookup(self, name: str) -> str | None:
        return self._entries.get(name.strip().lower())

    def names(self) -> list[str]:
        return sorted(self._entries)

    def __len__(self) -> int:
        return len(self._entries)


def resolve_source(ref: SourceRef, registry: Registry) -> str:
    """Resolve a classified reference to a URL.

    URLs resolve to themselves and are auto-registered under their derived
    name on first use. Names resolve through the registry.
    """
    if not ref.raw.strip():
        raise SourceResolutionError("empty source reference")
    if ref.kind == "url":
        name = derive_name(ref.raw)
        if name:
            try:
                registry.register(name, ref.raw)
            except RegistryCollisionError:
                # First registration wins; the URL still resolves.
                logger.warning(
                    "name %r already registered to a different URL; keeping the old entry",
                    name,
                )
        return ref.raw
    url = registry.lookup(ref.raw)
    if url is None:
        known = ", ".join(registry.names()) or "(none)"
        raise SourceResolutionError(
            f"name {ref.raw!r} not registered; known names: {known}"
        )
    return url


@dataclass(frozen=True)
class Checkout:
    """A locally available copy of a data source."""

    root_path: Path
    origin_url: str
    spec_path: Path


def cache_dir_for(url: str, cache_dir: str | Path) -> Path:
    """Deterministic checkout directory for a URL.

    Layout: ``<cache_dir>/<base>-<hash8>`` where ``base`` is the sanitized
    derived name and ``hash8`` the first 8 hex digits of the URL's SHA-256.
    """
    digest = hashlib.sha256(url.encode("utf-8")).hexdigest()[:8]
    base = re.sub(r"[^a-z0-9._-]+", "_", derive_name(url)) or "repo"
    return Path(cache_dir) / f"{base}-{digest}"


def _acquire_lock_for(key: str) -> threading.Lock:
    with _ACQUIRE_LOCKS_GUARD:
        return _ACQUIRE_LOCKS.setdefault(key, threading.Lock())


def _run_git(args: list[str], cwd: Path | None = None) -> None:
    cmd = ["git"] + args
    proc = subprocess.run(
        cmd,
        cwd=cwd,
        capture_output=True,
        text=True,
        env={**os.environ, "GIT_TERMINAL_PROMPT": "0"},
    )
    if proc.returncode != 0:
        detail = proc.stderr.strip() or proc.stdout.strip()
        raise AcquisitionError(f"git {args[0]} failed: {detail}")


def find_spec_file(root: Path) -> Path:
    """Locate Readme_AI.json at the repository root, case-insensitively.

    Subdirectories are not searched. Raises SpecMissingError when absent.
    """
    wanted = SPEC_FILENAME.lower()
    try:
        names = sorted(os.listdir(root))
    except OSError as exc:
        raise AcquisitionError(f"cannot list {root}: {exc}") from exc
    for name in names:
        if name.lower() == wanted and (root / name).is_file():
            return root / name
    raise SpecMissingError(f"no {SPEC_FILENAME} found at {root / SPEC_FILENAME}")


def acquire_repo(url: str, cache_dir: str | Path) -> Checkout:
    """Clone a source into the cache, or update an existing clone.

    Updates discard local modifications and fast-forward to the remote
    default branch head; the cache is tool-owned. A ``file://`` URL naming
    a directory that is not a git repository is used in place, read-only,
    with no update step.
    """
    parts = urlsplit(url)
    if parts.scheme not in _URL_SCHEMES:
        raise AcquisitionError(f"unsupported URL scheme {parts.scheme!r} in {url}")

    if parts.scheme == "file":
        local = Path(url2pathname(parts.path))
        if local.is_dir() and not (local / ".git").exists():
            return Checkout(
                root_path=local, origin_url=url, spec_path=find_spec_file(local)
            )
        if not local.exists():
            raise AcquisitionError(f"file URL points nowhere: {url}")

    dest = cache_dir_for(url, cache_dir)
    with _acquire_lock_for(str(dest)):
        if (dest / ".git").exists():
            _update_clone(dest)
        else:
            dest.parent.mkdir(parents=True, exist_ok=True)
            _run_git(["clone", "--quiet", url, str(dest)])
        return Checkout(
            root_path=dest, origin_url=url, spec_path=find_spec_file(dest)
        )


def _update_clone(dest: Path) -> None:
    _run_git(["fetch", "--quiet", "origin"], cwd=dest)
    # Track the remote's current default branch, then discard local state.
    _run_git(["remote", "set-head", "origin", "--auto"], cwd=dest)
    _run_git(["reset", "--hard", "--quiet", "refs/remotes/origin/HEAD"], cwd=dest)
    _run_git(["clean", "-fdq"], cwd=dest)
