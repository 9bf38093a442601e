from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import ConfigError

GROUPABLE = ("resource", "method", "methodIndex", "outcomeCase", "outcome", "url", "urlTemplate", "errorMessage", "iteration")


@dataclass(frozen=True)
class AnalysisParams:
    eps: float = 0.4
    min_pts: int = 7
    cluster_gate: int = 100
    # outcome, method, resource, url, error
    weights: tuple[float, ...] = (0.2, 0.2, 0.2, 0.2, 0.2)
    grouping_order: tuple[str, ...] = field(default=("resource", "method", "outcomeCase", "outcome"))

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "grouping_order", tuple(self.grouping_order))
        if not 0 < self.eps <= 1:
            raise ConfigError(f"eps must be in (0, 1], got {self.eps}")
        if isinstance(self.min_pts, bool) or not isinstance(self.min_pts, int) or self.min_pts < 1:
            raise ConfigError(f"min_pts must be a positive integer, got {self.min_pts!r}")
        if self.cluster_gate < 0:
            raise ConfigError("cluster_gate must be non-negative")
        if len(self.weights) != 5 or any(w < 0 or math.isnan(w) for w in self.weights):
            raise ConfigError("weights must be five non-negative numbers")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ConfigError(f"weights must sum to 1, got {sum(self.weights)}")
        bad = [a for a in self.grouping_order if a not in GROUPABLE]
        if bad:
            raise ConfigError(f"unknown grouping attribute(s): {', '.join(bad)}")
        if len(set(self.grouping_order)) != len(self.grouping_order):
            raise ConfigError("grouping order repeats an attribute")

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "minPts": self.min_pts,
            "clusterGate": self.cluster_gate,
            "weights": dict(zip(("outcome", "method", "resource", "url", "error"), self.weights)),
            "groupingOrder": list(self.grouping_order),
        }
