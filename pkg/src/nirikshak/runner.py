"""Execute walks against a live API and record one structured result per test."""

from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import logging
import random
import re
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence
from urllib.parse import quote, urlencode

import httpx

from .endpoints import EndpointDescription, ExpectedOutput, HttpMethod, OutcomeCase, ScenarioNode, enumerate_nodes
from .errors import ConfigError, LogFormatError, TemplateError, TransportError
from .graph import DEFAULT_MAX_STEPS, ExistenceState, build_graph, enumerate_walks, node_transition
from .pool import Hook, ResourcePool, apply_transition, cleanup_pool, select_resource, setup_pool
from .schema import PLACEHOLDER, ResourceInstance, ResourceSchema, _lookup, populate_template, stringify

log = logging.getLogger(__name__)

PASS, FAIL = "pass", "fail"

# canonical failure messages; analysis distances depend on this exact grammar
MESSAGE_GRAMMAR = re.compile(
    r"expected status in \{\d{3}(?:,\d{3})*\}, got \d{3}"
    r"|missing field \S+"
    r"|field \S+: expected .+, got .+"
    r"|transport: [a-z]+"
    r"|CONFIG: .+"
)


@dataclass(frozen=True)
class TestRecord:
    __test__ = False  # keep pytest from collecting this class

    outcome: str
    resource: str
    method: str
    methodIndex: int
    outcomeCase: str
    url: str
    iteration: int
    errorMessage: str = ""
    urlTemplate: str = ""
    walkId: int = 0
    stepIndex: int = 0

    def __post_init__(self):
        if self.outcome not in (PASS, FAIL):
            raise ValueError(f"outcome must be pass or fail, got {self.outcome!r}")
        if (self.outcome == PASS) != (self.errorMessage == ""):
            raise ValueError("errorMessage must be empty exactly when the test passed")

    @property
    def failed(self) -> bool:
        return self.outcome == FAIL

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


RECORD_FIELDS = tuple(f.name for f in dataclasses.fields(TestRecord))


@dataclass
class RunConfig:
    base_url: str
    steps: int = 3
    iterations: int = 5
    setup_instances: int = 10
    seed: int = 0
    setup_hook: Hook | None = None
    cleanup_hook: Hook | None = None
    request_timeout: float = 10.0
    max_steps: int = DEFAULT_MAX_STEPS
    fail_fast: bool = False

    def __post_init__(self):
        for name in ("steps", "iterations", "setup_instances", "seed", "max_steps"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        if not 1 <= self.steps <= self.max_steps:
            raise ConfigError(f"steps must be in [1, {self.max_steps}], got {self.steps}")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.setup_instances < 1:
            raise ConfigError("setup_instances must be >= 1")
        if self.request_timeout <= 0:
            raise ConfigError("request_timeout must be positive")


@dataclass
class Response:
    status: int = 0
    headers: Mapping[str, str] = dataclasses.field(default_factory=dict)
    body: Any = None
    transport_error: str | None = None


# --------------------------------------------------------------------------
# assertions


def _fmt(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def _subset_mismatch(expected: Any, actual: Any, path: str) -> str | None:
    if isinstance(expected, dict):
        actual = actual if isinstance(actual, dict) else {}
        for key, sub in expected.items():
            where = f"{path}.{key}" if path else key
            if key not in actual:
                return f"missing field {where}"
            msg = _subset_mismatch(sub, actual[key], where)
            if msg:
                return msg
        return None
    if isinstance(expected, list) and isinstance(actual, list) and len(expected) == len(actual):
        for i, (e, a) in enumerate(zip(expected, actual)):
            msg = _subset_mismatch(e, a, f"{path}[{i}]" if path else f"[{i}]")
            if msg:
                return msg
        return None
    if expected != actual or type(expected) is bool and type(actual) is not bool:
        return f"field {path or 'body'}: expected {_fmt(expected)}, got {_fmt(actual)}"
    return None


def assert_response(response: Response, expected: ExpectedOutput, instance: ResourceInstance) -> str | None:
    """Return None on pass, otherwise the canonical failure message."""
    if response.transport_error is not None:
        return f"transport: {response.transport_error}"
    if response.status not in expected.status:
        codes = ",".join(str(c) for c in sorted(expected.status))
        return f"expected status in {{{codes}}}, got {response.status}"
    if expected.headers:
        got = {k.lower(): v for k, v in response.headers.items()}
        for name, tmpl in expected.headers.items():
            want = populate_template(tmpl, instance, as_text=True)
            if name.lower() not in got:
                return f"missing field header:{name.lower()}"
            if str(want) != got[name.lower()]:
                return f"field header:{name.lower()}: expected {_fmt(str(want))}, got {_fmt(got[name.lower()])}"
    if expected.body is not None:
        want = populate_template(expected.body, instance)
        return _subset_mismatch(want, response.body, "")
    return None


# --------------------------------------------------------------------------
# single request


def populate_url(template: str, instance: ResourceInstance) -> str:
    return PLACEHOLDER.sub(
        lambda m: quote(stringify(_lookup(instance.values, m.group(1))), safe=""), template
    )


def _transport_kind(exc: Exception) -> str:
    if isinstance(exc, httpx.TimeoutException):
        return "timeout"
    if isinstance(exc, httpx.ConnectError):
        return "connect"
    if isinstance(exc, (httpx.RemoteProtocolError, httpx.LocalProtocolError)):
        return "protocol"
    if isinstance(exc, httpx.ReadError):
        return "read"
    if isinstance(exc, httpx.WriteError):
        return "write"
    return "other"


def build_request(node: ScenarioNode, instance: ResourceInstance) -> dict:
    """Populate a node's input templates into keyword arguments for httpx."""
    path = populate_url(node.url_template, instance)
    query = {k: populate_template(v, instance, as_text=True) for k, v in node.input.query.items()}
    headers = {k: str(populate_template(v, instance, as_text=True)) for k, v in node.input.headers.items()}
    req: dict = {"method": node.method.value, "url": path, "params": query, "headers": headers}
    if node.input.raw_body is not None:
        req["content"] = populate_template(node.input.raw_body, instance, as_text=True)
        headers.setdefault("Content-Type", "application/json")
    elif node.input.body is not None:
        req["content"] = json.dumps(populate_template(node.input.body, instance))
        headers.setdefault("Content-Type", "application/json")
    return req


def send(client: httpx.Client, req: dict) -> Response:
    try:
        r = client.request(**req)
    except httpx.HTTPError as exc:
        return Response(transport_error=_transport_kind(exc))
    body = None
    if r.content:
        try:
            body = r.json()
        except ValueError:
            body = r.text
    return Response(r.status_code, dict(r.headers), body)


def execute_node(
    node: ScenarioNode,
    instance: ResourceInstance,
    client: httpx.Client,
    *,
    iteration: int = 1,
    walk_id: int = 0,
    step_index: int = 0,
) -> TestRecord:
    common = dict(
        resource=node.resource,
        method=node.method.value,
        methodIndex=node.method_index,
        outcomeCase=node.outcome_case.value,
        urlTemplate=node.url_template,
        iteration=iteration,
        walkId=walk_id,
        stepIndex=step_index,
    )
    try:
        req = build_request(node, instance)
    except TemplateError as exc:
        return TestRecord(FAIL, url=node.url_template, errorMessage=f"CONFIG: {exc}", **common)
    url = req["url"] + ("?" + urlencode(req["params"]) if req["params"] else "")
    response = send(client, req)
    try:
        reason = assert_response(response, node.expected, instance)
    except TemplateError as exc:
        reason = f"CONFIG: {exc}"
    if reason is None:
        return TestRecord(PASS, url=url, **common)
    return TestRecord(FAIL, url=url, errorMessage=reason, **common)


# --------------------------------------------------------------------------
# whole run


@dataclass
class _Target:
    schema: ResourceSchema
    nodes: list[ScenarioNode]
    walks: list[list[str]]
    by_id: dict[str, ScenarioNode]
    creator: ScenarioNode | None


def _prepare(config: RunConfig, schema: ResourceSchema, endpoints: Sequence[EndpointDescription]) -> _Target:
    nodes = [n for n in enumerate_nodes(endpoints) if n.resource == schema.name]
    graph = build_graph(nodes)
    walks = enumerate_walks(graph, config.steps, config.max_steps)
    creator = next(
        (n for n in nodes if n.key == (HttpMethod.POST, OutcomeCase.POSITIVE) and n.method_index == 0),
        None,
    )
    return _Target(schema, nodes, walks, {n.node_id: n for n in nodes}, creator)


def _replenisher(target: _Target, pool: ResourcePool, client: httpx.Client, rng: random.Random):
    if target.creator is None:
        return None

    def make() -> ResourceInstance:
        inst = pool.fresh_instance(rng)
        resp = send(client, build_request(target.creator, inst))
        if resp.transport_error or resp.status not in target.creator.expected.status:
            log.warning("replenish via POST for %s got %s", pool.resource, resp.transport_error or resp.status)
        return inst

    return make


def _run_walks(
    target: _Target, pool: ResourcePool, client: httpx.Client, rng: random.Random, iteration: int, fail_fast: bool
) -> list[TestRecord]:
    records = []
    replenish = _replenisher(target, pool, client, rng)
    for walk_id, walk in enumerate(target.walks):
        instance: ResourceInstance | None = None
        for step, node_id in enumerate(walk):
            node = target.by_id[node_id]
            pre, post = node_transition(*node.key)
            if instance is None:
                instance = select_resource(pool, pre, rng, replenish)
            rec = execute_node(node, instance, client, iteration=iteration, walk_id=walk_id, step_index=step)
            if fail_fast and rec.errorMessage.startswith("transport:"):
                raise TransportError(f"{rec.method} {rec.url}: {rec.errorMessage}")
            records.append(rec)
            # the pool mirrors the state the API should be in, whatever the verdict
            apply_transition(pool, instance, post)
    return records


def run_resources(
    config: RunConfig,
    resources: Iterable[tuple[ResourceSchema, Sequence[EndpointDescription]]],
    *,
    client: httpx.Client | None = None,
) -> list[TestRecord]:
    targets = [_prepare(config, schema, eps) for schema, eps in resources]
    rng = random.Random(config.seed)
    own_client = client is None
    if own_client:
        client = httpx.Client(base_url=config.base_url, timeout=config.request_timeout)
    consumed: dict[str, set] = {t.schema.name: set() for t in targets}
    records: list[TestRecord] = []
    try:
        for iteration in range(1, config.iterations + 1):
            for target in targets:
                pool = setup_pool(
                    target.schema, config.setup_instances, rng, config.setup_hook, consumed[target.schema.name]
                )
                try:
                    records += _run_walks(target, pool, client, rng, iteration, config.fail_fast)
                finally:
                    cleanup_pool(pool, config.cleanup_hook)
            log.info("iteration %d done, %d records so far", iteration, len(records))
    finally:
        if own_client:
            client.close()
    return records


def run(
    config: RunConfig,
    schema: ResourceSchema,
    endpoints: Sequence[EndpointDescription],
    *,
    client: httpx.Client | None = None,
) -> list[TestRecord]:
    return run_resources(config, [(schema, endpoints)], client=client)


# --------------------------------------------------------------------------
# log file


def emit_log(records: Iterable[TestRecord], path: str | Path, *, run_id: str | None = None) -> None:
    run_id = run_id or uuid.uuid4().hex
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            line = rec.to_dict()
            line["runId"] = run_id
            line["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
            fh.write(json.dumps(line, ensure_ascii=False) + "\n")


def parse_record(obj: Any, line: int | None = None) -> TestRecord:
    if not isinstance(obj, dict):
        raise LogFormatError("record must be a JSON object", line)
    missing = [f for f in ("outcome", "resource", "method", "methodIndex", "outcomeCase", "url", "iteration") if f not in obj]
    if missing:
        raise LogFormatError(f"record lacks {', '.join(missing)}", line)
    try:
        return TestRecord(**{k: obj[k] for k in RECORD_FIELDS if k in obj})
    except (TypeError, ValueError) as exc:
        raise LogFormatError(str(exc), line) from None


def read_log(path: str | Path) -> list[TestRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise LogFormatError(f"invalid JSON: {exc.msg}", n) from None
            records.append(parse_record(obj, n))
    return records
