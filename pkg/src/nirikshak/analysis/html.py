"""Static, self-contained HTML rendering of an analysis report."""

from __future__ import annotations

import math
from html import escape


def _donut(ratio: dict) -> str:
    total, failed = ratio["total"], ratio["failed"]
    r, cx, cy, width = 60, 80, 80, 24
    circ = 2 * math.pi * r
    fail_len = circ * (failed / total if total else 0)
    return f"""
<svg width="160" height="160" viewBox="0 0 160 160" role="img" aria-label="pass/fail ratio">
  <circle cx="{cx}" cy="{cy}" r="{r}" fill="none" stroke="#3a9d5d" stroke-width="{width}"/>
  <circle cx="{cx}" cy="{cy}" r="{r}" fill="none" stroke="#d64545" stroke-width="{width}"
          stroke-dasharray="{fail_len:.3f} {circ - fail_len:.3f}" transform="rotate(-90 {cx} {cy})"/>
  <text x="{cx}" y="{cy + 5}" text-anchor="middle" font-size="16">{ratio['failRatio']:.1%}</text>
</svg>
<p>{ratio['passed']} passed, {failed} failed, {total} total</p>"""


def _bars(node: dict, scale: int) -> str:
    width = 100 * node["count"] / scale if scale else 0
    label = f"{escape(str(node['attribute']))} = {escape(str(node['value']))}"
    kids = "".join(_bars(c, scale) for c in node["children"])
    inner = f"<ul>{kids}</ul>" if kids else ""
    return (
        f'<li><div class="row"><span class="lbl">{label}</span>'
        f'<span class="bar" style="width:{width:.1f}%"></span>'
        f'<span class="n">{node["count"]}</span></div>{inner}</li>'
    )


def render_html(report: dict) -> str:
    parts = ["<h1>Test analysis</h1>"]
    if report["skipped"]:
        parts.append("<p>No tests were recorded; nothing to analyse.</p>")
    else:
        parts.append("<h2>Pass / fail</h2>" + _donut(report["ratio"]))
    if report["hierarchy"]:
        root = report["hierarchy"]
        parts.append(f"<h2>Failures by attribute</h2><ul class='tree'>{_bars(root, root['count'])}</ul>")
    if report["clusters"]:
        cl = report["clusters"]
        rows = "".join(
            "<tr>"
            f"<td>{c['label']}</td><td>{c['size']}</td>"
            + "".join(f"<td>{escape(str(c['representative'][k]))}</td>" for k in ("resource", "method", "outcomeCase", "url", "errorMessage"))
            + "</tr>"
            for c in cl["summary"]
        )
        parts.append(
            f"<h2>Clusters (eps={cl['params']['eps']}, minPts={cl['params']['minPts']})</h2>"
            f"<p>{len(cl['summary'])} clusters, {cl['noise']} noise records</p>"
            "<table><tr><th>label</th><th>size</th><th>resource</th><th>method</th>"
            f"<th>case</th><th>url</th><th>error</th></tr>{rows}</table>"
        )
    style = """
body{font-family:sans-serif;margin:2em;max-width:70em}
ul.tree,ul.tree ul{list-style:none;padding-left:1.2em}
.row{display:flex;align-items:center;gap:.5em;margin:2px 0}
.lbl{width:22em;font-size:90%}.bar{background:#d64545;height:.9em;display:inline-block}
.n{font-size:85%;color:#555}table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:3px 6px;font-size:90%}
"""
    return (
        "<!doctype html><html><head><meta charset='utf-8'><title>Test analysis</title>"
        f"<style>{style}</style></head><body>{''.join(parts)}</body></html>\n"
    )
