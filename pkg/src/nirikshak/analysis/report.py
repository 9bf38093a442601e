"""Gated analysis flow: ratio, then grouping, then clustering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..runner import TestRecord
from .clustering import ClusterAssignment, dbscan, summarize
from .grouping import HierarchyNode, hierarchical_grouping
from .params import AnalysisParams


@dataclass(frozen=True)
class RatioSummary:
    total: int
    passed: int
    failed: int

    @property
    def fail_ratio(self) -> float:
        return self.failed / self.total if self.total else 0.0

    def to_json(self) -> dict:
        return {"total": self.total, "passed": self.passed, "failed": self.failed, "failRatio": self.fail_ratio}


def test_ratio(records: Sequence[TestRecord]) -> RatioSummary | None:
    """Pass/fail counts, or None when there is nothing to analyse."""
    if not records:
        return None
    failed = sum(1 for r in records if r.failed)
    return RatioSummary(len(records), len(records) - failed, failed)


test_ratio.__test__ = False  # type: ignore[attr-defined]


@dataclass
class AnalysisReport:
    params: AnalysisParams
    ratio: RatioSummary | None = None
    hierarchy: HierarchyNode | None = None
    assignments: list[ClusterAssignment] | None = None
    cluster_summary: list[dict] | None = None

    @property
    def skipped(self) -> bool:
        return self.ratio is None

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_summary or [])

    def to_json(self) -> dict:
        clusters = None
        if self.assignments is not None:
            clusters = {
                "params": {
                    "eps": self.params.eps,
                    "minPts": self.params.min_pts,
                    "weights": self.params.to_json()["weights"],
                },
                "assignments": [a.to_json() for a in self.assignments],
                "summary": self.cluster_summary,
                "noise": sum(1 for a in self.assignments if a.is_noise),
            }
        return {
            "skipped": self.skipped,
            "ratio": self.ratio.to_json() if self.ratio else None,
            "hierarchy": self.hierarchy.to_json() if self.hierarchy else None,
            "clusters": clusters,
            "params": self.params.to_json(),
        }


def analyze(records: Sequence[TestRecord], params: AnalysisParams | None = None) -> AnalysisReport:
    params = params or AnalysisParams()
    report = AnalysisReport(params)
    report.ratio = test_ratio(records)
    if report.ratio is None or report.ratio.failed == 0:
        return report
    positions = [i for i, r in enumerate(records) if r.failed]
    failed = [records[i] for i in positions]
    report.hierarchy = hierarchical_grouping(failed, params.grouping_order)
    if len(failed) > params.cluster_gate:
        report.assignments = dbscan(failed, params, positions)
        report.cluster_summary = summarize(failed, [a.label for a in report.assignments])
    return report
