"""Hot loops of the clustering step: signature distance matrix and DBSCAN.

Two interchangeable implementations are kept: numba ``@njit`` kernels and a
pure-numpy path. numba is used when importable unless ``NIRIKSHAK_NO_NUMBA``
is set to a non-empty value other than ``0``.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distances import error_tokens, url_segments

NOISE = -1
_UNSEEN = -2

# neighbourhood test is d <= eps + EPS_SLACK so float noise in the weighted
# sum (0.2 + 0.1 + 0.1 > 0.4) cannot split ties differently between paths
EPS_SLACK = 1e-9

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("NIRIKSHAK_NO_NUMBA", "") in ("", "0")


@dataclass(frozen=True)
class Encoded:
    """Integer encoding of the distinct clustering signatures of a record list."""

    outcome: np.ndarray  # (k,) int64
    method: np.ndarray  # (k,) int64
    method_index: np.ndarray  # (k,) int64
    resource: np.ndarray  # (k,) int64
    url: np.ndarray  # (k, L) int64, padded with -1
    url_len: np.ndarray  # (k,) int64
    tokens: np.ndarray  # (k, T) int64 sorted unique ids, padded with -1
    tok_len: np.ndarray  # (k,) int64
    inverse: np.ndarray  # (n,) record -> signature row

    @property
    def n_signatures(self) -> int:
        return len(self.outcome)


def _codes(values, table: dict) -> list[int]:
    return [table.setdefault(v, len(table)) for v in values]


def encode(records: Sequence) -> Encoded:
    sig_rows: dict[tuple, int] = {}
    inverse = np.empty(len(records), dtype=np.int64)
    sigs = []
    for i, r in enumerate(records):
        sig = (r.outcome, r.method, r.methodIndex, r.resource, url_segments(r), error_tokens(r))
        row = sig_rows.get(sig)
        if row is None:
            row = sig_rows[sig] = len(sigs)
            sigs.append(sig)
        inverse[i] = row

    k = len(sigs)
    method_t: dict = {}
    resource_t: dict = {}
    seg_t: dict = {}
    tok_t: dict = {}
    outcome = np.array([1 if s[0] == "fail" else 0 for s in sigs], dtype=np.int64)
    method = np.array(_codes((s[1] for s in sigs), method_t), dtype=np.int64)
    method_index = np.array([s[2] for s in sigs], dtype=np.int64)
    resource = np.array(_codes((s[3] for s in sigs), resource_t), dtype=np.int64)

    max_segs = max((len(s[4]) for s in sigs), default=0)
    url = np.full((k, max(max_segs, 1)), -1, dtype=np.int64)
    url_len = np.zeros(k, dtype=np.int64)
    max_toks = max((len(s[5]) for s in sigs), default=0)
    tokens = np.full((k, max(max_toks, 1)), -1, dtype=np.int64)
    tok_len = np.zeros(k, dtype=np.int64)
    for row, s in enumerate(sigs):
        segs = _codes(s[4], seg_t)
        url[row, : len(segs)] = segs
        url_len[row] = len(segs)
        toks = sorted(_codes(sorted(s[5]), tok_t))
        tokens[row, : len(toks)] = toks
        tok_len[row] = len(toks)
    return Encoded(outcome, method, method_index, resource, url, url_len, tokens, tok_len, inverse)


# --------------------------------------------------------------------------
# numpy path


def signature_distances_numpy(enc: Encoded, weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    # accumulate in place to keep peak memory at a few k x k arrays
    out = w[0] * (enc.outcome[:, None] != enc.outcome[None, :])
    same_m = enc.method[:, None] == enc.method[None, :]
    same_i = enc.method_index[:, None] == enc.method_index[None, :]
    out += w[1] * np.where(same_m, np.where(same_i, 0.0, 0.5), 1.0)
    del same_m, same_i
    out += w[2] * (enc.resource[:, None] != enc.resource[None, :])

    diff = np.zeros(out.shape, dtype=np.float64)
    for p in range(enc.url.shape[1]):
        col = enc.url[:, p]
        diff += col[:, None] != col[None, :]
    longest = np.maximum(enc.url_len[:, None], enc.url_len[None, :]).astype(np.float64)
    np.divide(diff, longest, out=diff, where=longest > 0)
    diff[longest == 0] = 0.0
    out += w[3] * diff
    del diff, longest

    vocab = int(enc.tokens.max()) + 1 if enc.tokens.size else 0
    onehot = np.zeros((enc.n_signatures, max(vocab, 1)), dtype=np.float64)
    rows, cols = np.nonzero(enc.tokens >= 0)
    onehot[rows, enc.tokens[rows, cols]] = 1.0
    inter = onehot @ onehot.T
    union = enc.tok_len[:, None] + enc.tok_len[None, :] - inter
    np.divide(inter, union, out=inter, where=union > 0)
    d_err = np.where(union > 0, 1.0 - inter, 0.0)
    out += w[4] * d_err
    return out


def dbscan_numpy(sig_dist: np.ndarray, inverse: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    n = len(inverse)
    close = sig_dist <= eps + EPS_SLACK
    labels = np.full(n, _UNSEEN, dtype=np.int64)
    queued = np.zeros(n, dtype=bool)
    cluster = 0

    def region(i: int) -> np.ndarray:
        return np.flatnonzero(close[inverse[i]][inverse])

    for i in range(n):
        if labels[i] != _UNSEEN:
            continue
        neigh = region(i)
        if len(neigh) < min_pts:
            labels[i] = NOISE
            continue
        labels[i] = cluster
        queue = deque(j for j in neigh if labels[j] < 0 and not queued[j])
        queued[list(queue)] = True
        while queue:
            j = queue.popleft()
            if labels[j] == NOISE:
                labels[j] = cluster  # border point
                continue
            labels[j] = cluster
            nj = region(j)
            if len(nj) >= min_pts:
                for m in nj:
                    if labels[m] < 0 and not queued[m]:
                        queued[m] = True
                        queue.append(m)
        cluster += 1
    return labels


# --------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @njit(cache=True)
    def _signature_distances_nb(outcome, method, method_index, resource, url, url_len, tokens, tok_len, w):
        k = outcome.shape[0]
        out = np.zeros((k, k))
        for a in range(k):
            for b in range(a + 1, k):
                d_out = 0.0 if outcome[a] == outcome[b] else 1.0
                if method[a] != method[b]:
                    d_meth = 1.0
                elif method_index[a] == method_index[b]:
                    d_meth = 0.0
                else:
                    d_meth = 0.5
                d_res = 0.0 if resource[a] == resource[b] else 1.0

                longest = max(url_len[a], url_len[b])
                d_url = 0.0
                if longest > 0:
                    diff = 0
                    for p in range(url.shape[1]):
                        if url[a, p] != url[b, p]:
                            diff += 1
                    d_url = diff / float(longest)

                # sorted-merge intersection of token ids
                ia = 0
                ib = 0
                inter = 0
                while ia < tok_len[a] and ib < tok_len[b]:
                    ta = tokens[a, ia]
                    tb = tokens[b, ib]
                    if ta == tb:
                        inter += 1
                        ia += 1
                        ib += 1
                    elif ta < tb:
                        ia += 1
                    else:
                        ib += 1
                union = tok_len[a] + tok_len[b] - inter
                d_err = 0.0
                if union > 0:
                    d_err = 1.0 - inter / float(union)

                d = w[0] * d_out
                d = d + w[1] * d_meth
                d = d + w[2] * d_res
                d = d + w[3] * d_url
                d = d + w[4] * d_err
                out[a, b] = d
                out[b, a] = d
        return out

    @njit(cache=True)
    def _region_nb(close, inverse, i, buf):
        row = inverse[i]
        m = 0
        for j in range(inverse.shape[0]):
            if close[row, inverse[j]]:
                buf[m] = j
                m += 1
        return m

    @njit(cache=True)
    def _dbscan_nb(close, inverse, min_pts):
        n = inverse.shape[0]
        labels = np.full(n, -2, dtype=np.int64)
        queued = np.zeros(n, dtype=np.bool_)
        queue = np.empty(n, dtype=np.int64)
        buf = np.empty(n, dtype=np.int64)
        cluster = 0
        for i in range(n):
            if labels[i] != -2:
                continue
            m = _region_nb(close, inverse, i, buf)
            if m < min_pts:
                labels[i] = -1
                continue
            labels[i] = cluster
            head = 0
            tail = 0
            for t in range(m):
                j = buf[t]
                if labels[j] < 0 and not queued[j]:
                    queued[j] = True
                    queue[tail] = j
                    tail += 1
            while head < tail:
                j = queue[head]
                head += 1
                if labels[j] == -1:
                    labels[j] = cluster
                    continue
                labels[j] = cluster
                mj = _region_nb(close, inverse, j, buf)
                if mj >= min_pts:
                    for t in range(mj):
                        q = buf[t]
                        if labels[q] < 0 and not queued[q]:
                            queued[q] = True
                            queue[tail] = q
                            tail += 1
            cluster += 1
        return labels


def signature_distances_numba(enc: Encoded, weights: Sequence[float]) -> np.ndarray:
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    return _signature_distances_nb(
        enc.outcome, enc.method, enc.method_index, enc.resource,
        enc.url, enc.url_len, enc.tokens, enc.tok_len,
        np.asarray(weights, dtype=np.float64),
    )


def dbscan_numba(sig_dist: np.ndarray, inverse: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    close = sig_dist <= eps + EPS_SLACK
    return _dbscan_nb(close, inverse.astype(np.int64), int(min_pts))


def signature_distances(enc: Encoded, weights: Sequence[float], use_numba: bool | None = None) -> np.ndarray:
    if use_numba if use_numba is not None else USE_NUMBA:
        return signature_distances_numba(enc, weights)
    return signature_distances_numpy(enc, weights)


def dbscan_labels(
    sig_dist: np.ndarray, inverse: np.ndarray, eps: float, min_pts: int, use_numba: bool | None = None
) -> np.ndarray:
    if use_numba if use_numba is not None else USE_NUMBA:
        return dbscan_numba(sig_dist, inverse, eps, min_pts)
    return dbscan_numpy(sig_dist, inverse, eps, min_pts)
