import json
import random
import socket
import sys

import httpx
import pytest

from nirikshak.endpoints import ExpectedOutput, HttpMethod, OutcomeCase, enumerate_nodes
from nirikshak.errors import ConfigError, LogFormatError, SetupError, TransportError
from nirikshak.graph import build_graph, enumerate_walks
from nirikshak.runner import (
    MESSAGE_GRAMMAR,
    Response,
    RunConfig,
    TestRecord,
    assert_response,
    emit_log,
    execute_node,
    read_log,
    run,
)
from nirikshak.schema import ResourceInstance, generate_instance

from conftest import admin_hooks

INST = ResourceInstance("student", {"id": "abc", "name": "Zoe", "age": 19})


def expect(status, body=None, headers=None):
    return ExpectedOutput(frozenset(status), headers or {}, body)


class TestAssertResponse:
    def test_status_only(self):
        assert assert_response(Response(200), expect({200}), INST) is None

    def test_wrong_status(self):
        assert assert_response(Response(404), expect({200}), INST) == "expected status in {200}, got 404"
        assert assert_response(Response(500), expect({400, 422}), INST) == "expected status in {400,422}, got 500"

    def test_subset_match(self):
        resp = Response(200, body={"id": "abc", "name": "Zoe", "extra": 1})
        assert assert_response(resp, expect({200}, {"id": "{resource:id}"}), INST) is None

    def test_missing_and_unequal_fields(self):
        tmpl = {"id": "{resource:id}", "age": "{resource:age}"}
        assert assert_response(Response(200, body={"id": "abc"}), expect({200}, tmpl), INST) == "missing field age"
        msg = assert_response(Response(200, body={"id": "abc", "age": "19"}), expect({200}, tmpl), INST)
        assert msg == 'field age: expected 19, got "19"'
        assert assert_response(Response(200, body=None), expect({200}, tmpl), INST) == "missing field id"

    def test_nested_path(self):
        resp = Response(200, body={"a": {"b": 2}})
        assert assert_response(resp, expect({200}, {"a": {"b": 3}}), INST) == "field a.b: expected 3, got 2"

    def test_headers(self):
        exp = expect({200}, headers={"X-Id": "{resource:id}"})
        assert assert_response(Response(200, {"x-id": "abc"}), exp, INST) is None
        assert assert_response(Response(200, {}), exp, INST) == "missing field header:x-id"
        assert assert_response(Response(200, {"X-Id": "q"}), exp, INST) == 'field header:x-id: expected "abc", got "q"'

    def test_transport(self):
        assert assert_response(Response(transport_error="timeout"), expect({200}), INST) == "transport: timeout"

    def test_messages_follow_grammar(self):
        for msg in (
            "expected status in {200}, got 404",
            "missing field name",
            'field age: expected 19, got "19"',
            "transport: connect",
            "CONFIG: placeholder missing",
        ):
            assert MESSAGE_GRAMMAR.fullmatch(msg)


def _node(endpoints, method, case):
    return next(n for n in enumerate_nodes(endpoints) if n.key == (HttpMethod(method), OutcomeCase(case)))


def test_execute_get_positive(mock, student_schema, student_endpoints):
    inst = generate_instance(student_schema, random.Random(0))
    inst = ResourceInstance("student", dict(inst.values, id="abc"))
    mock.store.rows["abc"] = dict(inst.values)
    with httpx.Client(base_url=mock.url) as c:
        rec = execute_node(_node(student_endpoints, "GET", "POSITIVE"), inst, c)
    assert rec.outcome == "pass" and rec.url == "/student/abc" and rec.errorMessage == ""


def test_execute_get_negative_against_bug(mock, student_schema, student_endpoints):
    mock.store.bugs.getMissingReturns200 = True
    inst = generate_instance(student_schema, random.Random(0))
    with httpx.Client(base_url=mock.url) as c:
        rec = execute_node(_node(student_endpoints, "GET", "NEGATIVE"), inst, c)
    assert rec.outcome == "fail"
    assert rec.errorMessage == "expected status in {404}, got 200"


def test_destructive_post(mock, student_schema, student_endpoints):
    inst = generate_instance(student_schema, random.Random(0))
    node = _node(student_endpoints, "POST", "DESTRUCTIVE")
    with httpx.Client(base_url=mock.url) as c:
        assert execute_node(node, inst, c).outcome == "pass"
        mock.store.rows[inst.values["id"]] = dict(inst.values)
        assert execute_node(node, inst, c).outcome == "pass"


def test_template_error_is_config_failure(mock, student_endpoints):
    inst = ResourceInstance("student", {"name": "no id"})
    with httpx.Client(base_url=mock.url) as c:
        rec = execute_node(_node(student_endpoints, "GET", "POSITIVE"), inst, c)
    assert rec.outcome == "fail" and rec.errorMessage.startswith("CONFIG:")


def _expected_total(endpoints, steps, iterations):
    g = build_graph(enumerate_nodes(endpoints))
    return iterations * sum(len(w) for w in enumerate_walks(g, steps))


def test_clean_run_small(run_student, student_endpoints):
    records = run_student(steps=2, iterations=1, setup_instances=3)
    assert len(records) == _expected_total(student_endpoints, 2, 1)
    assert [r for r in records if r.failed] == []


def test_iterations_scale_linearly(run_student):
    one = run_student(steps=2, iterations=1, seed=5)
    two = run_student(steps=2, iterations=2, seed=5)
    assert len(two) == 2 * len(one)
    assert [r.iteration for r in two].count(2) == len(one)


def test_records_map_to_graph_nodes(run_student, student_endpoints):
    ids = set(build_graph(enumerate_nodes(student_endpoints)).node_ids)
    records = run_student("putWrongStatus", steps=2, iterations=1)
    assert {f"{r.method}:{r.outcomeCase}:{r.methodIndex}" for r in records} <= ids
    assert all(MESSAGE_GRAMMAR.fullmatch(r.errorMessage) for r in records if r.failed)


def _closed_port():
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


def test_unreachable_api_fails_every_record(student_schema, student_endpoints):
    cfg = RunConfig(f"http://127.0.0.1:{_closed_port()}", steps=1, iterations=1, setup_instances=2, request_timeout=2)
    records = run(cfg, student_schema, student_endpoints)
    assert len(records) == 11
    assert all(r.failed and r.errorMessage == "transport: connect" for r in records)


def test_fail_fast_raises(student_schema, student_endpoints):
    cfg = RunConfig(f"http://127.0.0.1:{_closed_port()}", steps=1, iterations=1, fail_fast=True)
    with pytest.raises(TransportError):
        run(cfg, student_schema, student_endpoints)


def test_setup_failure_aborts(mock, student_schema, student_endpoints):
    cfg = RunConfig(mock.url, steps=1, iterations=2, setup_hook=[sys.executable, "-c", "raise SystemExit(1)"])
    with pytest.raises(SetupError):
        run(cfg, student_schema, student_endpoints)


@pytest.mark.parametrize(
    "kw", [{"steps": 0}, {"steps": 4}, {"iterations": 0}, {"setup_instances": 0}, {"request_timeout": 0}]
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        RunConfig("http://x", **kw)


def _rec(i, failed=False):
    return TestRecord(
        "fail" if failed else "pass", "student", "GET", 0, "POSITIVE", f"/student/{i}", 1,
        "expected status in {200}, got 404" if failed else "", "/student/{resource:id}", i, 0,
    )


def test_empty_log(tmp_path):
    path = tmp_path / "log.jsonl"
    emit_log([], path)
    assert path.exists() and path.read_text() == ""
    assert read_log(path) == []


def test_log_round_trip(tmp_path):
    records = [_rec(i, failed=i < 318) for i in range(806)]
    path = tmp_path / "log.jsonl"
    emit_log(records, path, run_id="r1")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 806
    first = json.loads(lines[0])
    assert first["runId"] == "r1" and "T" in first["timestamp"]
    assert read_log(path) == records


def test_unicode_survives(tmp_path):
    rec = TestRecord("fail", "étudiant", "GET", 0, "POSITIVE", "/x", 1, 'field name: expected "Zoë", got "Zoe"')
    path = tmp_path / "u.jsonl"
    emit_log([rec], path)
    assert read_log(path) == [rec]


def test_malformed_line_reports_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    emit_log([_rec(0)], path)
    with open(path, "a") as fh:
        fh.write("{not json\n")
    with pytest.raises(LogFormatError, match="line 2"):
        read_log(path)


def test_unwritable_log_path(tmp_path):
    with pytest.raises(OSError):
        emit_log([_rec(0)], tmp_path / "missing-dir" / "log.jsonl")


def test_record_invariants():
    with pytest.raises(ValueError):
        TestRecord("pass", "s", "GET", 0, "POSITIVE", "/x", 1, "oops")
    with pytest.raises(ValueError):
        TestRecord("fail", "s", "GET", 0, "POSITIVE", "/x", 1, "")
