"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 500 2000 8000] [--repeat 3]

Records are synthetic failures with many distinct signatures so the
deduplicated matrix stays large. Both paths are checked for equal output.
"""

import argparse
import random
import time

import numpy as np

from nirikshak.analysis import _kernels
from nirikshak.runner import TestRecord

METHODS = ["GET", "POST", "PUT", "PATCH", "DELETE"]
CASES = ["POSITIVE", "NEGATIVE", "DESTRUCTIVE"]


def synthetic(n: int, seed: int = 0) -> list[TestRecord]:
    rnd = random.Random(seed)
    out = []
    for i in range(n):
        depth = rnd.randint(1, 4)
        template = "/" + "/".join(rnd.choice(["student", "{resource:id}", "marks", f"v{rnd.randint(0, 9)}"]) for _ in range(depth))
        code = rnd.choice([200, 201, 202, 204, 400, 404, 409, 500])
        msg = rnd.choice([
            f"expected status in {{{rnd.choice([200, 404, 409])}}}, got {code}",
            f"missing field f{rnd.randint(0, 30)}",
            f"field f{rnd.randint(0, 30)}: expected {rnd.randint(0, 99)}, got {rnd.randint(0, 99)}",
        ])
        out.append(TestRecord("fail", rnd.choice(["student", "teacher"]), rnd.choice(METHODS), rnd.randint(0, 2),
                              rnd.choice(CASES), template, 1, msg, template))
    return out


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 2000, 5000])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    w, eps, min_pts = (0.2,) * 5, 0.4, 7
    warm = _kernels.encode(synthetic(50))
    _kernels.dbscan_numba(_kernels.signature_distances_numba(warm, w), warm.inverse, eps, min_pts)

    print(f"{'records':>8} {'sigs':>6} {'dist np':>9} {'dist nb':>9} {'dbscan np':>10} {'dbscan nb':>10}")
    for n in args.sizes:
        enc = _kernels.encode(synthetic(n))
        d_np = _kernels.signature_distances_numpy(enc, w)
        d_nb = _kernels.signature_distances_numba(enc, w)
        np.testing.assert_allclose(d_np, d_nb, atol=1e-12)
        l_np = _kernels.dbscan_numpy(d_np, enc.inverse, eps, min_pts)
        l_nb = _kernels.dbscan_numba(d_nb, enc.inverse, eps, min_pts)
        np.testing.assert_array_equal(l_np, l_nb)
        t = [
            best_of(lambda: _kernels.signature_distances_numpy(enc, w), args.repeat),
            best_of(lambda: _kernels.signature_distances_numba(enc, w), args.repeat),
            best_of(lambda: _kernels.dbscan_numpy(d_np, enc.inverse, eps, min_pts), args.repeat),
            best_of(lambda: _kernels.dbscan_numba(d_nb, enc.inverse, eps, min_pts), args.repeat),
        ]
        print(f"{n:>8} {enc.n_signatures:>6} " + " ".join(f"{x * 1e3:>8.1f}ms" for x in t))


if __name__ == "__main__":
    main()
