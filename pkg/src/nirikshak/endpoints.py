"""Endpoint descriptions and scenario-node enumeration."""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import EndpointError, TemplateError
from .schema import ResourceSchema, check_template


class HttpMethod(str, enum.Enum):
    GET = "GET"
    POST = "POST"
    PUT = "PUT"
    PATCH = "PATCH"
    DELETE = "DELETE"

    def __str__(self) -> str:
        return self.value


class OutcomeCase(str, enum.Enum):
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"
    DESTRUCTIVE = "DESTRUCTIVE"

    def __str__(self) -> str:
        return self.value


_POSITIVE_STATUS = {
    HttpMethod.GET: frozenset({200}),
    HttpMethod.POST: frozenset({201}),
    HttpMethod.PUT: frozenset({200, 201}),
    HttpMethod.PATCH: frozenset({200}),
    HttpMethod.DELETE: frozenset({200, 204}),
}


def default_expected_status(method: HttpMethod, case: OutcomeCase) -> frozenset[int]:
    method, case = HttpMethod(method), OutcomeCase(case)
    if case is OutcomeCase.POSITIVE:
        return _POSITIVE_STATUS[method]
    if case is OutcomeCase.NEGATIVE:
        return frozenset({404})
    return frozenset({400, 422})


@dataclass(frozen=True)
class RequestInput:
    headers: Mapping[str, Any] = field(default_factory=dict)
    query: Mapping[str, Any] = field(default_factory=dict)
    body: Any = None
    raw_body: str | None = None

    @property
    def is_empty(self) -> bool:
        return not self.headers and not self.query and self.body is None and self.raw_body is None


@dataclass(frozen=True)
class ExpectedOutput:
    status: frozenset[int]
    headers: Mapping[str, Any] = field(default_factory=dict)
    body: Any = None


@dataclass(frozen=True)
class CaseSpec:
    input: RequestInput
    expected: ExpectedOutput


@dataclass(frozen=True)
class EndpointDescription:
    resource: str
    method: HttpMethod
    url_template: str
    cases: Mapping[OutcomeCase, CaseSpec]


@dataclass(frozen=True)
class ScenarioNode:
    resource: str
    method: HttpMethod
    outcome_case: OutcomeCase
    method_index: int
    url_template: str
    input: RequestInput
    expected: ExpectedOutput

    @property
    def key(self) -> tuple[HttpMethod, OutcomeCase]:
        """Equivalence key: nodes sharing it make the same assertion."""
        return self.method, self.outcome_case

    @property
    def node_id(self) -> str:
        return f"{self.method.value}:{self.outcome_case.value}:{self.method_index}"


def _where(i: int, method: Any, case: str | None = None) -> str:
    loc = f"endpoint #{i} ({method})"
    return f"{loc} case {case}" if case else loc


def _parse_status(raw: Any, where: str) -> frozenset[int]:
    if isinstance(raw, int) and not isinstance(raw, bool):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        raise EndpointError(f"{where}: expected status must be a non-empty list")
    for code in raw:
        if isinstance(code, bool) or not isinstance(code, int) or not 100 <= code <= 599:
            raise EndpointError(f"{where}: invalid status code {code!r}")
    return frozenset(raw)


def _parse_case(doc: Any, method: HttpMethod, case: OutcomeCase, schema: ResourceSchema, where: str) -> CaseSpec:
    if not isinstance(doc, dict):
        raise EndpointError(f"{where}: case must be an object")
    inp = doc.get("input") or {}
    exp = doc.get("expected") or {}
    if not isinstance(inp, dict) or not isinstance(exp, dict):
        raise EndpointError(f"{where}: input/expected must be objects")
    headers, query = inp.get("headers") or {}, inp.get("query") or {}
    if not isinstance(headers, dict) or not isinstance(query, dict):
        raise EndpointError(f"{where}: headers/query must be objects")
    raw_body = inp.get("rawBody")
    if raw_body is not None and not isinstance(raw_body, str):
        raise EndpointError(f"{where}: rawBody must be a string")
    request = RequestInput(headers, query, inp.get("body"), raw_body)

    status = (
        _parse_status(exp["status"], where)
        if "status" in exp
        else default_expected_status(method, case)
    )
    exp_headers = exp.get("headers") or {}
    if not isinstance(exp_headers, dict):
        raise EndpointError(f"{where}: expected headers must be an object")
    expected = ExpectedOutput(status, exp_headers, exp.get("body"))

    if case is OutcomeCase.DESTRUCTIVE and request.is_empty:
        raise EndpointError(f"{where}: destructive case needs a malformed body, query or header template")
    for part in (request.headers, request.query, request.body, request.raw_body, expected.headers, expected.body):
        try:
            check_template(part, schema)
        except TemplateError as exc:
            raise EndpointError(f"{where}: {exc}") from None
    return CaseSpec(request, expected)


def parse_endpoints(document: str | bytes, schema: ResourceSchema) -> list[EndpointDescription]:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise EndpointError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if isinstance(doc, dict) and "endpoints" in doc:
        doc = doc["endpoints"]
    if not isinstance(doc, list):
        raise EndpointError("endpoints document must be a JSON array of endpoint entries")

    out = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise EndpointError(f"endpoint #{i}: entry must be an object")
        raw_method = entry.get("method")
        try:
            method = HttpMethod(str(raw_method).upper())
        except ValueError:
            raise EndpointError(f"{_where(i, raw_method)}: unknown method {raw_method!r}") from None
        url = entry.get("url")
        if not isinstance(url, str) or not url.startswith("/"):
            raise EndpointError(f"{_where(i, method)}: url must be a path starting with '/'")
        try:
            check_template(url, schema)
        except TemplateError as exc:
            raise EndpointError(f"{_where(i, method)}: {exc}") from None
        raw_cases = entry.get("cases")
        if not isinstance(raw_cases, dict) or not raw_cases:
            raise EndpointError(f"{_where(i, method)}: at least one case is required")
        cases = {}
        for name, cdoc in raw_cases.items():
            try:
                case = OutcomeCase(name.upper())
            except ValueError:
                raise EndpointError(f"{_where(i, method)}: unknown outcome case {name!r}") from None
            cases[case] = _parse_case(cdoc, method, case, schema, _where(i, method, case.value))
        out.append(EndpointDescription(schema.name, method, url, cases))
    return out


_CASE_ORDER = (OutcomeCase.POSITIVE, OutcomeCase.NEGATIVE, OutcomeCase.DESTRUCTIVE)


def enumerate_nodes(endpoints: Iterable[EndpointDescription]) -> list[ScenarioNode]:
    """One node per declared case; indices count up per (resource, method, case)."""
    counters: dict[tuple, int] = defaultdict(int)
    nodes = []
    for ep in endpoints:
        for case in _CASE_ORDER:
            spec = ep.cases.get(case)
            if spec is None:
                continue
            slot = (ep.resource, ep.method, case)
            nodes.append(
                ScenarioNode(
                    ep.resource, ep.method, case, counters[slot], ep.url_template, spec.input, spec.expected
                )
            )
            counters[slot] += 1
    return nodes
