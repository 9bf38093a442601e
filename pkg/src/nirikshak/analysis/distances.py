"""Per-attribute distances between test records and their weighted mean.

Every function maps a pair of records to [0, 1] with d(x, x) = 0 and
d(x, y) = d(y, x). These scalar versions are the reference definitions; the
kernels in ``_kernels`` compute the same values in bulk.
"""

from __future__ import annotations

import re
from typing import Sequence

from ..runner import TestRecord

ATTRIBUTES = ("outcome", "method", "resource", "url", "error")

_UUID = re.compile(r"[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}")
_NUMBER = re.compile(r"-?\d+")
ID_PLACEHOLDER = "{resource:id}"


def url_segments(record: TestRecord) -> tuple[str, ...]:
    """Path segments with concrete ids folded back into placeholder form."""
    if record.urlTemplate:
        path = record.urlTemplate.split("?", 1)[0]
        return tuple(s for s in path.split("/") if s)
    path = record.url.split("?", 1)[0]
    segs = []
    for s in path.split("/"):
        if not s:
            continue
        segs.append(ID_PLACEHOLDER if _UUID.fullmatch(s) or _NUMBER.fullmatch(s) else s)
    return tuple(segs)


def error_tokens(record: TestRecord) -> frozenset[str]:
    return frozenset(record.errorMessage.split())


def d_outcome(a: TestRecord, b: TestRecord) -> float:
    return 0.0 if a.outcome == b.outcome else 1.0


def d_method(a: TestRecord, b: TestRecord) -> float:
    if a.method != b.method:
        return 1.0
    return 0.0 if a.methodIndex == b.methodIndex else 0.5


def d_resource(a: TestRecord, b: TestRecord) -> float:
    return 0.0 if a.resource == b.resource else 1.0


def segment_distance(sa: Sequence[str], sb: Sequence[str]) -> float:
    longest = max(len(sa), len(sb))
    if longest == 0:
        return 0.0
    differing = sum(
        1 for i in range(longest) if i >= len(sa) or i >= len(sb) or sa[i] != sb[i]
    )
    return differing / longest


def d_url(a: TestRecord, b: TestRecord) -> float:
    return segment_distance(url_segments(a), url_segments(b))


def jaccard_distance(ta: frozenset, tb: frozenset) -> float:
    union = len(ta | tb)
    if union == 0:
        return 0.0
    return 1.0 - len(ta & tb) / union


def d_error(a: TestRecord, b: TestRecord) -> float:
    return jaccard_distance(error_tokens(a), error_tokens(b))


ATTRIBUTE_DISTANCES = (d_outcome, d_method, d_resource, d_url, d_error)


def attribute_distances(a: TestRecord, b: TestRecord) -> tuple[float, ...]:
    return tuple(d(a, b) for d in ATTRIBUTE_DISTANCES)


def combined_distance(a: TestRecord, b: TestRecord, weights: Sequence[float]) -> float:
    """Weighted mean of the five attribute distances (weights sum to 1)."""
    total = 0.0
    for w, d in zip(weights, attribute_distances(a, b)):
        total += w * d
    return total
