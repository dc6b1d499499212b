"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

The backend is fixed at import time from the PROLATE_BACKEND environment
variable: "numba" requires the JIT path (raises if numba is missing),
"numpy" forces the fallback, unset prefers numba when importable.

Both backends implement the same two primitives:

  basis_matrix(weighted_vecs, nodes, xs)
      out[k, j] = sum_i weighted_vecs[k, i] * exp(2*pi*1j * nodes[i] * xs[j])

  window_counts(points, origins, side)
      out[q] = #{p : origins[q] <= points[p] <= origins[q] + side, all axes}

Results of the two backends agree to floating-point roundoff, not bitwise;
a given backend is deterministic run to run.
"""

import os

import numpy as np

# points per block in the numpy fallback; bounds peak memory of the
# intermediate phase matrix to order * _CHUNK complex entries
_CHUNK = 1 << 14


def _pick_backend() -> str:
    choice = os.environ.get("PROLATE_BACKEND", "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(
            "PROLATE_BACKEND must be 'numba' or 'numpy', got %r" % (choice,)
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


_BACKEND = _pick_backend()


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return _BACKEND


def _basis_matrix_numpy(weighted_vecs, nodes, xs):
    kdim = weighted_vecs.shape[0]
    n = xs.shape[0]
    out = np.empty((kdim, n), dtype=np.complex128)
    wv = weighted_vecs.astype(np.complex128)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        phases = np.exp(2j * np.pi * np.outer(nodes, xs[lo:hi]))
        out[:, lo:hi] = wv @ phases
    return out


def _sort_by_first_axis(points):
    order = np.argsort(points[:, 0], kind="stable")
    return np.ascontiguousarray(points[order])


def _window_counts_numpy(points, origins, side):
    m = origins.shape[0]
    counts = np.empty(m, dtype=np.int64)
    if points.shape[0] == 0:
        counts[:] = 0
        return counts
    sp = _sort_by_first_axis(points)
    first = sp[:, 0]
    los = np.searchsorted(first, origins[:, 0], side="left")
    his = np.searchsorted(first, origins[:, 0] + side, side="right")
    for q in range(m):
        seg = sp[los[q] : his[q], 1:]
        if seg.shape[1] == 0:
            counts[q] = his[q] - los[q]
        else:
            rel = seg - origins[q, 1:]
            counts[q] = int(np.count_nonzero(((rel >= 0.0) & (rel <= side)).all(axis=1)))
    return counts


if _BACKEND == "numba":
    import numba

    @numba.njit(cache=True, parallel=True)
    def _basis_matrix_numba(weighted_vecs, nodes, xs):  # pragma: no cover
        kdim, order = weighted_vecs.shape
        n = xs.shape[0]
        out = np.zeros((kdim, n), dtype=np.complex128)
        for j in numba.prange(n):
            x = xs[j]
            for i in range(order):
                ph = 2.0 * np.pi * nodes[i] * x
                e = complex(np.cos(ph), np.sin(ph))
                for k in range(kdim):
                    out[k, j] += weighted_vecs[k, i] * e
        return out

    @numba.njit(cache=True, parallel=True)
    def _window_counts_numba(sorted_points, origins, side):  # pragma: no cover
        d = sorted_points.shape[1]
        m = origins.shape[0]
        first = sorted_points[:, 0].copy()
        counts = np.zeros(m, dtype=np.int64)
        for q in numba.prange(m):
            lo = np.searchsorted(first, origins[q, 0], side="left")
            hi = np.searchsorted(first, origins[q, 0] + side, side="right")
            c = 0
            for p in range(lo, hi):
                inside = True
                for a in range(1, d):
                    rel = sorted_points[p, a] - origins[q, a]
                    if rel < 0.0 or rel > side:
                        inside = False
                        break
                if inside:
                    c += 1
            counts[q] = c
        return counts

    def basis_matrix(weighted_vecs, nodes, xs):
        return _basis_matrix_numba(
            np.ascontiguousarray(weighted_vecs, dtype=np.float64),
            np.ascontiguousarray(nodes, dtype=np.float64),
            np.ascontiguousarray(xs, dtype=np.float64),
        )

    def window_counts(points, origins, side):
        points = np.ascontiguousarray(points, dtype=np.float64)
        origins = np.ascontiguousarray(origins, dtype=np.float64)
        if points.shape[0] == 0:
            return np.zeros(origins.shape[0], dtype=np.int64)
        return _window_counts_numba(_sort_by_first_axis(points), origins, float(side))

else:

    def basis_matrix(weighted_vecs, nodes, xs):
        return _basis_matrix_numpy(
            np.asarray(weighted_vecs, dtype=np.float64),
            np.asarray(nodes, dtype=np.float64),
            np.asarray(xs, dtype=np.float64),
        )

    def window_counts(points, origins, side):
        return _window_counts_numpy(
            np.asarray(points, dtype=np.float64),
            np.asarray(origins, dtype=np.float64),
            float(side),
        )
