"""DBSCAN over failed test records using the combined mixed-type distance."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..runner import TestRecord
from . import _kernels
from .params import AnalysisParams

NOISE = _kernels.NOISE


@dataclass(frozen=True)
class ClusterAssignment:
    record_index: int
    label: int  # NOISE (-1) or cluster id >= 0

    @property
    def is_noise(self) -> bool:
        return self.label == NOISE

    def to_json(self) -> dict:
        return {"recordIndex": self.record_index, "label": "NOISE" if self.is_noise else self.label}


def distance_matrix(records: Sequence[TestRecord], weights: Sequence[float], use_numba: bool | None = None) -> np.ndarray:
    """Full (n, n) combined-distance matrix."""
    enc = _kernels.encode(records)
    sig = _kernels.signature_distances(enc, weights, use_numba)
    return sig[np.ix_(enc.inverse, enc.inverse)]


def dbscan_labels(
    records: Sequence[TestRecord], params: AnalysisParams, use_numba: bool | None = None
) -> np.ndarray:
    if not records:
        return np.empty(0, dtype=np.int64)
    enc = _kernels.encode(records)
    sig = _kernels.signature_distances(enc, params.weights, use_numba)
    return _kernels.dbscan_labels(sig, enc.inverse, params.eps, params.min_pts, use_numba)


def dbscan(
    failed: Sequence[TestRecord],
    params: AnalysisParams,
    indices: Sequence[int] | None = None,
    use_numba: bool | None = None,
) -> list[ClusterAssignment]:
    """Label each record in log order; ``indices`` maps them back to log positions."""
    labels = dbscan_labels(failed, params, use_numba)
    indices = range(len(failed)) if indices is None else indices
    return [ClusterAssignment(int(i), int(lab)) for i, lab in zip(indices, labels)]


def signature(record: TestRecord) -> dict:
    return {
        "resource": record.resource,
        "method": record.method,
        "methodIndex": record.methodIndex,
        "outcomeCase": record.outcomeCase,
        "url": record.urlTemplate or record.url,
        "errorMessage": record.errorMessage,
    }


def summarize(records: Sequence[TestRecord], labels: Sequence[int]) -> list[dict]:
    sizes = Counter(int(lab) for lab in labels if lab != NOISE)
    first: dict[int, int] = {}
    for pos, lab in enumerate(labels):
        first.setdefault(int(lab), pos)
    return [
        {"label": lab, "size": sizes[lab], "representative": signature(records[first[lab]])}
        for lab in sorted(sizes)
    ]
