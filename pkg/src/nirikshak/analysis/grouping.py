"""Hierarchical binning of failed records by a sequence of attributes."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Sequence

from ..errors import ConfigError
from ..runner import TestRecord
from .params import GROUPABLE


@dataclass
class HierarchyNode:
    attribute: str
    value: Any
    count: int
    children: list[HierarchyNode] = field(default_factory=list)

    def leaves(self) -> list[HierarchyNode]:
        if not self.children:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def to_json(self) -> dict:
        return {
            "attribute": self.attribute,
            "value": self.value,
            "count": self.count,
            "children": [c.to_json() for c in self.children],
        }


def _split(records: Sequence[TestRecord], order: Sequence[str]) -> list[HierarchyNode]:
    if not order:
        return []
    attr, rest = order[0], order[1:]
    counts = Counter(getattr(r, attr) for r in records)
    values = sorted(counts, key=lambda v: (-counts[v], str(v)))
    return [
        HierarchyNode(attr, v, counts[v], _split([r for r in records if getattr(r, attr) == v], rest))
        for v in values
    ]


def hierarchical_grouping(failed: Sequence[TestRecord], order: Sequence[str]) -> HierarchyNode:
    """Root covers all records; level i partitions by ``order[i]``."""
    bad = [a for a in order if a not in GROUPABLE]
    if bad:
        raise ConfigError(f"unknown grouping attribute(s): {', '.join(bad)}")
    return HierarchyNode("all", "failed", len(failed), _split(list(failed), list(order)))
