"""In-process student CRUD API with switchable, named bugs.

Used as the target of end-to-end runs. Besides the REST surface it exposes
``/__admin/*`` endpoints so setup/cleanup hooks can load and purge data::

    python -m nirikshak.mock_api serve --port 8080 --bug getMissingReturns200
    python -m nirikshak.mock_api seed --base-url http://127.0.0.1:8080   # hook
    python -m nirikshak.mock_api purge --base-url http://127.0.0.1:8080  # hook
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
import urllib.request
from dataclasses import dataclass, fields
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

STUDENT_FIELDS = {"id": str, "name": str, "age": int, "branch": str, "address": str}


@dataclass
class BugFlags:
    getMissingReturns200: bool = False
    deleteMissingReturns200: bool = False
    postDuplicateCreates: bool = False
    patchDropsField: bool = False
    putWrongStatus: bool = False

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def only(cls, *names: str) -> BugFlags:
        unknown = set(names) - set(cls.names())
        if unknown:
            raise ValueError(f"unknown bug flags: {sorted(unknown)}")
        return cls(**{n: True for n in names})


def _valid(body: Any, *, partial: bool) -> bool:
    if not isinstance(body, dict):
        return False
    if set(body) - set(STUDENT_FIELDS):
        return False
    if not partial and set(body) != set(STUDENT_FIELDS):
        return False
    for key, value in body.items():
        typ = STUDENT_FIELDS[key]
        if isinstance(value, bool) or not isinstance(value, typ):
            return False
        if typ is str and not value:
            return False
    return True


class StudentStore:
    def __init__(self, bugs: BugFlags | None = None):
        self.bugs = bugs or BugFlags()
        self.rows: dict[str, dict] = {}
        self.lock = threading.Lock()

    def handle(self, method: str, path: str, headers: dict[str, str], raw: bytes) -> tuple[int, Any]:
        parts = [p for p in path.split("?", 1)[0].split("/") if p]
        body: Any = None
        if raw:
            try:
                body = json.loads(raw)
            except ValueError:
                return 400, {"error": "malformed JSON"}
        with self.lock:
            if parts[:1] == ["__admin"]:
                return self._admin(method, parts[1:], body)
            if parts == ["student"] and method == "POST":
                return self._post(body)
            if len(parts) == 2 and parts[0] == "student":
                sid = parts[1]
                handler = getattr(self, f"_{method.lower()}", None)
                if method != "POST" and handler is not None:
                    return handler(sid, body, headers)
                return 405, {"error": "method not allowed"}
            return 404, {"error": "no such route"}

    def _admin(self, method: str, parts: list[str], body: Any) -> tuple[int, Any]:
        if parts == ["reset"] and method == "POST":
            self.rows.clear()
            return 200, {"ok": True}
        if parts == ["seed"] and method == "POST" and isinstance(body, list):
            for row in body:
                self.rows[str(row["id"])] = dict(row)
            return 200, {"seeded": len(body)}
        if parts == ["purge"] and method == "POST" and isinstance(body, list):
            for row in body:
                self.rows.pop(str(row["id"] if isinstance(row, dict) else row), None)
            return 200, {"purged": len(body)}
        if parts == ["state"] and method == "GET":
            return 200, sorted(self.rows.values(), key=lambda r: r["id"])
        return 404, {"error": "no such admin route"}

    def _get(self, sid, body, headers):
        if sid in self.rows:
            return 200, self.rows[sid]
        if self.bugs.getMissingReturns200:
            return 200, None
        return 404, {"error": "not found"}

    def _post(self, body):
        if not _valid(body, partial=False):
            return 400, {"error": "invalid student"}
        if body["id"] in self.rows and not self.bugs.postDuplicateCreates:
            return 409, {"error": "already exists"}
        self.rows[body["id"]] = dict(body)
        return 201, self.rows[body["id"]]

    def _put(self, sid, body, headers):
        if not _valid(body, partial=False) or body["id"] != sid:
            return 400, {"error": "invalid student"}
        exists = sid in self.rows
        if headers.get("if-match") == "*" and not exists:
            return 412, {"error": "precondition failed"}
        self.rows[sid] = dict(body)
        if exists:
            return 200, self.rows[sid]
        return (202 if self.bugs.putWrongStatus else 201), self.rows[sid]

    def _patch(self, sid, body, headers):
        if not _valid(body, partial=True) or body.get("id", sid) != sid:
            return 400, {"error": "invalid patch"}
        if sid not in self.rows:
            return 404, {"error": "not found"}
        self.rows[sid].update(body)
        out = dict(self.rows[sid])
        if self.bugs.patchDropsField:
            out.pop("name", None)
        return 200, out

    def _delete(self, sid, body, headers):
        if sid in self.rows:
            del self.rows[sid]
            return 204, None
        if self.bugs.deleteMissingReturns200:
            return 200, None
        return 404, {"error": "not found"}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    disable_nagle_algorithm = True
    store: StudentStore

    def _dispatch(self) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        headers = {k.lower(): v for k, v in self.headers.items()}
        status, payload = self.store.handle(self.command, self.path, headers, raw)
        data = b"" if payload is None else json.dumps(payload).encode()
        self.send_response(status)
        if data:
            self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    do_GET = do_POST = do_PUT = do_PATCH = do_DELETE = _dispatch

    def log_message(self, format, *args):  # noqa: A002
        pass


class MockServer:
    """Handle for a running mock; usable as a context manager."""

    def __init__(self, port: int = 0, bugs: BugFlags | None = None, host: str = "127.0.0.1"):
        self.store = StudentStore(bugs)
        handler = type("Handler", (_Handler,), {"store": self.store})
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    @property
    def bugs(self) -> BugFlags:
        return self.store.bugs

    def start(self) -> MockServer:
        if not self._thread.is_alive():
            self._thread.start()
        return self

    def stop(self) -> None:
        # shutdown() waits for serve_forever and would block if never started
        if self._thread.is_alive():
            self.httpd.shutdown()
        self.httpd.server_close()

    def reset(self) -> None:
        with self.store.lock:
            self.store.rows.clear()

    def __enter__(self) -> MockServer:
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def serve(port: int = 0, bug_flags: BugFlags | None = None) -> MockServer:
    """Start the mock in a background thread; ``OSError`` if the port is taken."""
    return MockServer(port, bug_flags).start()


def _post_admin(base_url: str, action: str, payload: Any) -> None:
    req = urllib.request.Request(
        f"{base_url.rstrip('/')}/__admin/{action}",
        data=json.dumps(payload).encode(),
        method="POST",
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(req, timeout=10) as resp:
        resp.read()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m nirikshak.mock_api")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_serve = sub.add_parser("serve", help="run the mock API in the foreground")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--bug", action="append", default=[], choices=BugFlags.names())
    for name in ("seed", "purge"):
        p = sub.add_parser(name, help=f"hook: {name} instances read as a JSON array on stdin")
        p.add_argument("--base-url", required=True)
    args = parser.parse_args(argv)

    if args.cmd == "serve":
        server = MockServer(args.port, BugFlags.only(*args.bug))
        print(f"mock student API on {server.url} bugs={args.bug or 'none'}", flush=True)
        try:
            server.httpd.serve_forever()
        except KeyboardInterrupt:
            pass
        return 0
    instances = json.load(sys.stdin)
    _post_admin(args.base_url, args.cmd, instances)
    return 0


if __name__ == "__main__":
    sys.exit(main())
