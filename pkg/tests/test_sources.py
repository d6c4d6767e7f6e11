"""Source classification, registry persistence, and repository acquisition."""

from __future__ import annotations

import json
import threading
from pathlib import Path

import pytest

from readme_ai.errors import (
    AcquisitionError,
    RegistryCollisionError,
    SourceResolutionError,
    SpecMissingError,
)
from readme_ai.sources import (
    Registry,
    acquire_repo,
    cache_dir_for,
    classify_source,
    derive_name,
    find_spec_file,
    resolve_source,
)


class TestClassify:
    @pytest.mark.parametrize(
        "raw,kind",
        [
            ("https://example.com/org/proj.git", "url"),
            ("http://example.com/x", "url"),
            ("file:///tmp/somewhere", "url"),
            ("hedgehog", "name"),
            ("my-lib", "name"),
            ("ssh://git@example.com/x.git", "name"),
            ("", "name"),
        ],
    )
    def test_kinds(self, raw, kind):
        assert classify_source(raw).kind == kind

    @pytest.mark.parametrize(
        "url,name",
        [
            ("https://example.com/org/proj.git", "proj"),
            ("https://example.com/org/Proj", "proj"),
            ("https://example.com/org/proj/", "proj"),
            ("file:///tmp/My-Repo", "my-repo"),
        ],
    )
    def test_derive_name(self, url, name):
        assert derive_name(url) == name


class TestCacheLayout:
    def test_frozen_vector(self, tmp_path):
        # sha256("https://example.com/org/proj.git")[:8] == "d5016f47"
        dest = cache_dir_for("https://example.com/org/proj.git", tmp_path)
        assert dest == tmp_path / "proj-d5016f47"

    def test_distinct_urls_never_collide(self, tmp_path):
        a = cache_dir_for("https://example.com/a/proj.git", tmp_path)
        b = cache_dir_for("https://example.com/b/proj.git", tmp_path)
        assert a != b
        assert a.name.startswith("proj-") and b.name.startswith("proj-")

    def test_hostile_name_sanitized(self, tmp_path):
        dest = cache_dir_for("https://example.com/org/..%2Fetc", tmp_path)
        assert dest.parent == tmp_path
        assert dest.name not in (".", "..")
        assert "/" not in dest.name and "\\" not in dest.name


class TestRegistry:
    def test_round_trip_and_restart(self, tmp_path):
        path = tmp_path / "lookup.json"
        reg = Registry(path)
        reg.register("hedgehog", "https://example.com/hedgehog.git")
        assert reg.lookup("hedgehog") == "https://example.com/hedgehog.git"
        assert reg.lookup("HEDGEHOG") == "https://example.com/hedgehog.git"

        fresh = Registry(path)  # same file, new process equivalent
        assert fresh.lookup("hedgehog") == "https://example.com/hedgehog.git"
        assert json.loads(path.read_text()) == {
            "hedgehog": "https://example.com/hedgehog.git"
        }

    def test_collision_requires_overwrite(self, tmp_path):
        reg = Registry(tmp_path / "lookup.json")
        reg.register("name", "https://example.com/a.git")
        with pytest.raises(RegistryCollisionError):
            reg.register("name", "https://example.com/b.git")
        assert reg.lookup("name") == "https://example.com/a.git"
        reg.register("name", "https://example.com/b.git", overwrite=True)
        assert reg.lookup("name") == "https://example.com/b.git"

    def test_same_pair_is_noop(self, tmp_path):
        reg = Registry(tmp_path / "lookup.json")
        reg.register("name", "https://example.com/a.git")
        reg.register("name", "https://example.com/a.git")
        assert len(reg) == 1

    def test_empty_name_rejected(self, tmp_path):
        reg = Registry(tmp_path / "lookup.json")
        with pytest.raises(SourceResolutionError):
            reg.register("  ", "https://example.com/a.git")

    def test_missing_file_is_empty(self, tmp_path):
        reg = Registry(tmp_path / "nope" / "lookup.json")
        assert reg.names() == []

    def test_concurrent_registrations_all_persist(self, tmp_path):
        reg = Registry(tmp_path / "lookup.json")
        errors = []

        def worker(i):
            try:
                reg.register(f"name{i}", f"https://example.com/{i}.git")
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len(Registry(tmp_path / "lookup.json")) == 16


class TestResolve:
    def test_empty_reference(self, tmp_path):
        reg = Registry(tmp_path / "lookup.json")
        with pytest.raises(SourceResolutionError, match="empty source reference"):
            resolve_source(classify_source(""), reg)

    def test_url_auto_registers(self, tmp_path):
        reg = Registry(tmp_path / "lookup.json")
        url = "https://example.com/org/hedgehog.git"
        assert resolve_source(classify_source(url), reg) == url
        assert reg.lookup("hedgehog") == url
        # Name resolution now returns the same URL.
        assert resolve_source(classify_source("hedgehog"), reg) == url

    def test_auto_register_collision_keeps_old(self, tmp_path):
        reg = Registry(tmp_path / "lookup.json")
        first = "https://example.com/a/proj.git"
        second = "https://example.com/b/proj.git"
        resolve_source(classify_source(first), reg)
        assert resolve_source(classify_source(second), reg) == second
        assert reg.lookup("proj") == first

    def test_unknown_name(self, tmp_path):
        reg = Registry(tmp_path / "lookup.json")
        reg.register("known", "https://example.com/known.git")
        with pytest.raises(SourceResolutionError, match="known"):
            resolve_source(classify_source("ghost"), reg)


class TestAcquire:
    def test_clone_and_find_spec(self, make_git_repo, tmp_path):
        repo = make_git_repo({"Readme_AI.json": "{}", "x.txt": "hi"})
        checkout = acquire_repo(repo.as_uri(), tmp_path / "cache")
        assert checkout.spec_path.name == "Readme_AI.json"
        assert (checkout.root_path / "x.txt").read_text() == "hi"
        assert checkout.root_path != repo  # cloned, not used in place

    def test_update_picks_up_new_commit(self, make_git_repo, tmp_path):
        import subprocess, os

        repo = make_git_repo({"Readme_AI.json": "{}", "x.txt": "v1"})
        cache = tmp_path / "cache"
        first = acquire_repo(repo.as_uri(), cache)
        assert (first.root_path / "x.txt").read_text() == "v1"

        (repo / "x.txt").write_text("v2")
        env = {**os.environ, "GIT_TERMINAL_PROMPT": "0"}
        subprocess.run(["git", "add", "-A"], cwd=repo, check=True, capture_output=True, env=env)
        subprocess.run(
            ["git", "commit", "-qm", "update"], cwd=repo, check=True, capture_output=True, env=env
        )

        second = acquire_repo(repo.as_uri(), cache)
        assert second.root_path == first.root_path
        assert (second.root_path / "x.txt").read_text() == "v2"

    def test_update_discards_local_edits(self, make_git_repo, tmp_path):
        repo = make_git_repo({"Readme_AI.json": "{}", "x.txt": "clean"})
        cache = tmp_path / "cache"
        checkout = acquire_repo(repo.as_uri(), cache)
        (checkout.root_path / "x.txt").write_text("dirty local edit")
        (checkout.root_path / "stray.txt").write_text("untracked")

        again = acquire_repo(repo.as_uri(), cache)
        assert (again.root_path / "x.txt").read_text() == "clean"
        assert not (again.root_path / "stray.txt").exists()

    def test_plain_directory_used_in_place(self, tmp_path):
        src = tmp_path / "plain"
        src.mkdir()
        (src / "Readme_AI.json").write_text("{}")
        checkout = acquire_repo(src.as_uri(), tmp_path / "cache")
        assert checkout.root_path == src

    def test_case_insensitive_spec_discovery(self, tmp_path):
        src = tmp_path / "plain"
        src.mkdir()
        (src / "readme_ai.JSON").write_text("{}")
        assert find_spec_file(src).name == "readme_ai.JSON"

    def test_missing_spec_raises(self, tmp_path):
        src = tmp_path / "plain"
        src.mkdir()
        (src / "other.txt").write_text("x")
        with pytest.raises(SpecMissingError, match="Readme_AI.json"):
            acquire_repo(src.as_uri(), tmp_path / "cache")

    def test_spec_not_found_in_subdirs(self, tmp_path):
        src = tmp_path / "plain"
        (src / "docs").mkdir(parents=True)
        (src / "docs" / "Readme_AI.json").write_text("{}")
        with pytest.raises(SpecMissingError):
            acquire_repo(src.as_uri(), tmp_path / "cache")

    def test_nonexistent_file_url(self, tmp_path):
        with pytest.raises(AcquisitionError):
            acquire_repo((tmp_path / "ghost").as_uri(), tmp_path / "cache")

    def test_unsupported_scheme(self, tmp_path):
        with pytest.raises(AcquisitionError, match="scheme"):
            acquire_repo("ftp://example.com/x", tmp_path / "cache")

    def test_clone_failure_reports_git_error(self, tmp_path):
        missing = tmp_path / "not-a-repo"
        missing.mkdir()
        (missing / ".git").mkdir()  # looks like git, is not
        with pytest.raises(AcquisitionError, match="git"):
            acquire_repo(missing.as_uri(), tmp_path / "cache")
