"""Benchmark the numba kernels against the pure-numpy fallback.

The backend is fixed at import time, so each side runs in a subprocess with
PROLATE_BACKEND set accordingly.  Two workloads are timed: the basis-matrix
transform that dominates function evaluation, and the window-count scan
behind the density diagnostics.

Run from the repository root:

    python benchmarks/bench_backends.py
"""

import json
import os
import subprocess
import sys

_WORKER = r"""
import json, os, sys, time
import numpy as np
from prolate import _accel

rng = np.random.default_rng(0)
results = {"backend": _accel.active_backend()}

# basis transform: 12 basis rows, 200 nodes, 200k evaluation points
wv = rng.standard_normal((12, 200))
nodes = np.sort(rng.uniform(-0.5, 0.5, 200))
xs = rng.uniform(-2.0, 2.0, 200_000)
_accel.basis_matrix(wv, nodes, xs[:64])  # warm-up / JIT
best = float("inf")
for _ in range(3):
    t0 = time.perf_counter()
    out = _accel.basis_matrix(wv, nodes, xs)
    best = min(best, time.perf_counter() - t0)
results["basis_matrix_s"] = best
results["basis_checksum"] = float(np.abs(out).sum())

# window counts: 20k points, 40k windows in d=2
pts = rng.uniform(0.0, 100.0, size=(20_000, 2))
origins = rng.uniform(0.0, 99.0, size=(40_000, 2))
_accel.window_counts(pts[:100], origins[:100], 1.0)
best = float("inf")
for _ in range(3):
    t0 = time.perf_counter()
    counts = _accel.window_counts(pts, origins, 1.0)
    best = min(best, time.perf_counter() - t0)
results["window_counts_s"] = best
results["counts_checksum"] = int(counts.sum())

print(json.dumps(results))
"""


def run_backend(backend: str) -> dict:
    env = dict(os.environ, PROLATE_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    rows = [run_backend("numpy")]
    try:
        rows.append(run_backend("numba"))
    except subprocess.CalledProcessError:
        print("numba backend unavailable; benchmarked numpy only")
    print(f"{'backend':<8} {'basis_matrix':>14} {'window_counts':>14}")
    for row in rows:
        print(
            f"{row['backend']:<8} {row['basis_matrix_s']*1e3:>11.1f} ms "
            f"{row['window_counts_s']*1e3:>11.1f} ms"
        )
    if len(rows) == 2:
        a, b = rows
        if a["counts_checksum"] != b["counts_checksum"]:
            print("WARNING: backends disagree on window counts")
        print(
            f"speedup   {a['basis_matrix_s']/b['basis_matrix_s']:>11.2f} x  "
            f"{a['window_counts_s']/b['window_counts_s']:>12.2f} x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
