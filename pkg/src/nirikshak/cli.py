"""Command line entry point: ``nirikshak run | analyze | graph | mock``.

Exit codes: 0 success (test failures are data), 2 configuration or input
error, 3 setup or fatal transport error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .analysis import AnalysisParams, analyze
from .analysis.html import render_html
from .endpoints import EndpointDescription, enumerate_nodes, parse_endpoints
from .errors import ConfigError, LogFormatError, NirikshakError
from .graph import build_graph
from .runner import RunConfig, emit_log, read_log, run_resources
from .schema import ResourceSchema, parse_resource_schema

log = logging.getLogger("nirikshak")

EXIT_OK, EXIT_CONFIG, EXIT_FATAL = 0, 2, 3
SEED_ENV = "NIRIKSHAK_SEED"


@dataclass
class CliConfig:
    resources: list[tuple[ResourceSchema, list[EndpointDescription]]]
    run: dict[str, Any]
    analysis: AnalysisParams
    output: dict[str, str] = field(default_factory=dict)


def _read(path: Path, what: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {str(path)!r}: {exc.strerror}") from None


_ANALYSIS_KEYS = {"eps", "minPts", "clusterGate", "weights", "groupingOrder"}


def _analysis_params(doc: dict) -> AnalysisParams:
    unknown = sorted(set(doc) - _ANALYSIS_KEYS)
    if unknown:
        raise ConfigError(f"unknown analysis keys: {', '.join(unknown)}")
    kw: dict[str, Any] = {}
    for key, name in (("eps", "eps"), ("minPts", "min_pts"), ("clusterGate", "cluster_gate"), ("groupingOrder", "grouping_order")):
        if key in doc:
            kw[name] = doc[key]
    if "weights" in doc:
        w = doc["weights"]
        if isinstance(w, dict):
            w = [w.get(k, 0.0) for k in ("outcome", "method", "resource", "url", "error")]
        kw["weights"] = w
    try:
        return AnalysisParams(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _hook(raw: Any, base_url: str) -> Any:
    if raw is None:
        return None
    subst = {"{baseUrl}": base_url, "{python}": sys.executable}
    if isinstance(raw, str):
        for k, v in subst.items():
            raw = raw.replace(k, v)
        return raw
    if isinstance(raw, list) and all(isinstance(x, str) for x in raw):
        return [subst.get(x, x) for x in raw]
    raise ConfigError("hooks must be command strings or argv lists")


def load_config(path: str | Path) -> CliConfig:
    path = Path(path)
    text = _read(path, "config")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    root = path.parent
    entries = doc.get("resources")
    if not isinstance(entries, list):
        raise ConfigError(f"{path}: 'resources' must be a list of {{schema, endpoints}} entries")
    resources = []
    for entry in entries:
        if not isinstance(entry, dict) or "schema" not in entry or "endpoints" not in entry:
            raise ConfigError(f"{path}: each resource needs 'schema' and 'endpoints' paths")
        schema_path, ep_path = root / entry["schema"], root / entry["endpoints"]
        schema_text, ep_text = _read(schema_path, "schema"), _read(ep_path, "endpoints")
        try:
            schema = parse_resource_schema(schema_text)
        except ConfigError as exc:
            raise ConfigError(f"{schema_path}: {exc}") from None
        try:
            endpoints = parse_endpoints(ep_text, schema)
        except ConfigError as exc:
            raise ConfigError(f"{ep_path}: {exc}") from None
        resources.append((schema, endpoints))
    names = [s.name for s, _ in resources]
    if len(set(names)) != len(names):
        raise ConfigError(f"{path}: resource names repeat")

    base_url = doc.get("baseUrl", "")
    hooks = doc.get("hooks") or {}
    run = {
        "base_url": base_url,
        "steps": doc.get("steps", 3),
        "iterations": doc.get("iterations", 5),
        "setup_instances": doc.get("setupInstances", 10),
        "seed": doc.get("seed", 0),
        "max_steps": doc.get("maxSteps", 3),
        "request_timeout": doc.get("requestTimeout", 10.0),
        "fail_fast": bool(doc.get("failFast", False)),
        "setup_hook": _hook(hooks.get("setup"), base_url),
        "cleanup_hook": _hook(hooks.get("cleanup"), base_url),
    }
    analysis = _analysis_params(doc.get("analysis") or {})
    return CliConfig(resources, run, analysis, doc.get("output") or {})


def _write_json(path: str | Path, payload: Any) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out = args.out or cfg.output.get("log")
    if not out:
        raise ConfigError("no log path: pass --out or set output.log in the config")
    run = dict(cfg.run)
    if os.environ.get(SEED_ENV):
        try:
            run["seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    for flag, key in (("seed", "seed"), ("steps", "steps"), ("iterations", "iterations"), ("setup_instances", "setup_instances")):
        if getattr(args, flag) is not None:
            run[key] = getattr(args, flag)
    if not run["base_url"]:
        raise ConfigError("config lacks baseUrl")
    config = RunConfig(**run)
    records = run_resources(config, cfg.resources)
    try:
        emit_log(records, out)
    except OSError as exc:
        print(f"error: cannot write log {out!r}: {exc.strerror}", file=sys.stderr)
        return EXIT_FATAL
    failed = sum(r.failed for r in records)
    print(f"{len(records)} tests, {failed} failed; log written to {out}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        records = read_log(args.log)
    except OSError as exc:
        raise ConfigError(f"cannot read log {args.log!r}: {exc.strerror}") from None
    base = load_config(args.config).analysis if args.config else AnalysisParams()
    params = AnalysisParams(
        eps=args.eps if args.eps is not None else base.eps,
        min_pts=args.min_pts if args.min_pts is not None else base.min_pts,
        cluster_gate=args.cluster_gate if args.cluster_gate is not None else base.cluster_gate,
        weights=base.weights,
        grouping_order=base.grouping_order,
    )
    report = analyze(records, params).to_json()
    _write_json(args.out, report)
    if args.html:
        Path(args.html).write_text(render_html(report), encoding="utf-8")
    if report["skipped"]:
        print("no tests in log; analysis skipped")
    else:
        r = report["ratio"]
        n_clusters = len(report["clusters"]["summary"]) if report["clusters"] else "-"
        print(f"{r['total']} tests, {r['failed']} failed ({r['failRatio']:.2%}); clusters: {n_clusters}")
    return EXIT_OK


def graph_export(cfg: CliConfig) -> dict:
    graphs = [build_graph(enumerate_nodes(eps)).to_json() for _, eps in cfg.resources]
    for g, (schema, _) in zip(graphs, cfg.resources):
        g["resource"] = schema.name
    if len(graphs) == 1:
        return graphs[0]
    return {"graphs": graphs}


def cmd_graph(args: argparse.Namespace) -> int:
    _write_json(args.out, graph_export(load_config(args.config)))
    return EXIT_OK


def cmd_mock(args: argparse.Namespace) -> int:
    from . import mock_api

    argv = ["serve", "--port", str(args.port)]
    for b in args.bug:
        argv += ["--bug", b]
    return mock_api.main(argv)


def build_parser() -> argparse.ArgumentParser:
    from .mock_api import BugFlags

    p = argparse.ArgumentParser(prog="nirikshak", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="generate and execute tests, write a JSONL log")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.add_argument("--steps", type=int)
    r.add_argument("--iterations", type=int)
    r.add_argument("--setup-instances", type=int, dest="setup_instances")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="analyse a JSONL log into a JSON (and HTML) report")
    a.add_argument("--log", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--html")
    a.add_argument("--config", help="take analysis parameters from a run config")
    a.add_argument("--eps", type=float)
    a.add_argument("--min-pts", type=int, dest="min_pts")
    a.add_argument("--cluster-gate", type=int, dest="cluster_gate")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("graph", help="export the scenario graph as JSON")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--steps", type=int, help="accepted and ignored")
    g.set_defaults(func=cmd_graph)

    m = sub.add_parser("mock", help="serve the bundled student API")
    m.add_argument("--port", type=int, default=8080)
    m.add_argument("--bug", action="append", default=[], choices=BugFlags.names())
    m.set_defaults(func=cmd_mock)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except LogFormatError as exc:
        print(f"error: {args.log}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NirikshakError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
