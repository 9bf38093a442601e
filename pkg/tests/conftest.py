from __future__ import annotations

import sys
from pathlib import Path

import pytest

from nirikshak.endpoints import parse_endpoints
from nirikshak.mock_api import BugFlags, MockServer, _post_admin
from nirikshak.runner import RunConfig, run
from nirikshak.schema import parse_resource_schema

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).resolve().parents[1] / "src" / "nirikshak" / "data" / "student"


@pytest.fixture(scope="session")
def student_schema():
    return parse_resource_schema((DATA / "resource.json").read_text())


@pytest.fixture(scope="session")
def student_endpoints(student_schema):
    return parse_endpoints((DATA / "endpoints.json").read_text(), student_schema)


@pytest.fixture(scope="session")
def _server():
    server = MockServer().start()
    yield server
    server.stop()


@pytest.fixture
def mock(_server):
    """The shared mock API, reset to empty and bug-free for each test."""
    _server.reset()
    _server.store.bugs = BugFlags()
    yield _server
    _server.reset()
    _server.store.bugs = BugFlags()


def admin_hooks(url: str) -> dict:
    return {
        "setup_hook": lambda xs: _post_admin(url, "seed", xs),
        "cleanup_hook": lambda xs: _post_admin(url, "purge", xs),
    }


@pytest.fixture
def run_student(mock, student_schema, student_endpoints):
    """Run the student fixture against the mock with the given bugs and settings."""

    def go(*bugs: str, **settings):
        mock.reset()
        mock.store.bugs = BugFlags.only(*bugs)
        settings.setdefault("seed", 42)
        cfg = RunConfig(mock.url, **admin_hooks(mock.url), **settings)
        return run(cfg, student_schema, student_endpoints)

    return go


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
