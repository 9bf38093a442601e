"""Log analysis: pass/fail ratio, hierarchical grouping and DBSCAN clustering."""

from .clustering import NOISE, ClusterAssignment, dbscan, distance_matrix
from .distances import (
    attribute_distances,
    combined_distance,
    d_error,
    d_method,
    d_outcome,
    d_resource,
    d_url,
)
from .grouping import HierarchyNode, hierarchical_grouping
from .params import AnalysisParams
from .report import AnalysisReport, RatioSummary, analyze, test_ratio

__all__ = [
    "NOISE",
    "AnalysisParams",
    "AnalysisReport",
    "ClusterAssignment",
    "HierarchyNode",
    "RatioSummary",
    "analyze",
    "attribute_distances",
    "combined_distance",
    "d_error",
    "d_method",
    "d_outcome",
    "d_resource",
    "d_url",
    "dbscan",
    "distance_matrix",
    "hierarchical_grouping",
    "test_ratio",
]
