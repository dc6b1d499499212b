"""Spectrum of the time-frequency limiting operator on the unit frequency band.

The operator acts on the frequency interval [-1/2, 1/2] through the kernel
sin(pi*R*(xi - eta)) / (pi*(xi - eta)) and is discretized by a symmetrized
Gauss-Legendre Nystrom scheme.  Its eigenvalues mu_0 >= mu_1 >= ... lie in
(0, 1), sum to R, stay near 1 up to index ~R, and then plunge to 0
super-exponentially.  Tensor powers give the d-dimensional operator, whose
eigenvalues are all d-fold products of the 1-d ones.

Conventions
-----------
* 1-d eigenvalues are 0-based: ``mu_k``, k = 0, 1, ... with mu_0 the top.
* d-dimensional eigenvalues are 1-based: ``lambda_n``, n = 1, 2, ... with
  lambda_1 the top; in arrays, index 0 holds lambda_1.
"""

from __future__ import annotations

import heapq
import json
import math
import os
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.linalg import eigh

from .errors import CapacityError, NumericError

# eigenvalues below this are reported but flagged unresolved: double
# precision cannot separate them from discretization noise
CLAMP_FLOOR = 1e-14

# excursions outside [0, 1] up to this size are clamped; larger ones abort
CLAMP_SLACK = 1e-9

# bump when the discretization changes incompatibly; part of the cache key
KERNEL_VERSION = 1

_LOG_TINY = math.log(np.finfo(float).tiny)


def default_order(R: float) -> int:
    """Quadrature order used when none is given; grows with the bandwidth."""
    return max(200, int(math.ceil(20.0 * R)))


@dataclass(frozen=True)
class QuadratureRule:
    """Positive quadrature rule on [-1/2, 1/2].

    Weights sum to 1 (the interval length); nodes are strictly increasing.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != (self.order,) or weights.shape != (self.order,):
            raise ValueError("nodes/weights must both have length `order`")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 (interval length)")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def build_quadrature(order: int) -> QuadratureRule:
    """Gauss-Legendre rule mapped to [-1/2, 1/2].

    Exact on polynomials up to degree 2*order - 1.

    Parameters
    ----------
    order : int
        Number of nodes, at least 2.
    """
    if order < 2:
        raise ValueError(f"quadrature order must be >= 2, got {order}")
    x, w = np.polynomial.legendre.leggauss(int(order))
    return QuadratureRule(order=int(order), nodes=x / 2.0, weights=w / 2.0)


def sinc_kernel(R: float, xi, eta):
    """Kernel sin(pi*R*(xi - eta)) / (pi*(xi - eta)); equals R on the diagonal.

    Accepts scalars or broadcastable arrays; symmetric in (xi, eta).
    """
    diff = np.asarray(xi, dtype=float) - np.asarray(eta, dtype=float)
    out = R * np.sinc(R * diff)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Spectrum1D:
    """Nystrom eigendecomposition of the 1-d limiting operator.

    Attributes
    ----------
    bandwidth_R : float
        Side length of the time window; also the trace of the operator.
    rule : QuadratureRule
        Frequency-side discretization.
    eigenvalues : ndarray
        mu_0 >= mu_1 >= ..., clamped to [0, 1]; entries below
        ``CLAMP_FLOOR`` are unresolved (see ``n_resolved``).
    eigvec_samples : ndarray, shape (order, order)
        Row k samples the k-th frequency-side eigenfunction at the nodes;
        rows are orthonormal under the rule's weights.
    n_resolved : int
        Count of eigenvalues at or above the resolution floor.
    """

    bandwidth_R: float
    rule: QuadratureRule
    eigenvalues: np.ndarray
    eigvec_samples: np.ndarray
    n_resolved: int

    @property
    def order(self) -> int:
        return self.rule.order

    def counting(self, eps: float) -> int:
        """Number of eigenvalues >= eps, for eps in (0, 1)."""
        return counting_function(self, eps)

    def trace_defect(self) -> float:
        return float(self.eigenvalues.sum() - self.bandwidth_R)

    def cache_key(self) -> str:
        return _cache_key(self.bandwidth_R, self.order)


def compute_spectrum_1d(R: float, order: Optional[int] = None) -> Spectrum1D:
    """Eigenvalues and eigenfunction samples of the 1-d limiting operator.

    The kernel is symmetrized as M[i, j] = sqrt(w_i) K(xi_i, xi_j) sqrt(w_j)
    and passed to a dense symmetric eigensolver; eigenfunction samples are
    recovered by dividing each eigenvector by sqrt(w).

    Raises
    ------
    NumericError
        If eigenvalues leave [0, 1] by more than the clamp slack, or the
        trace identity sum(mu_k) = R fails beyond 1e-6 * R.
    """
    if R <= 0:
        raise ValueError(f"bandwidth R must be positive, got {R}")
    if order is None:
        order = default_order(R)
    rule = build_quadrature(order)
    sqw = np.sqrt(rule.weights)
    M = sqw[:, None] * sinc_kernel(R, rule.nodes[:, None], rule.nodes[None, :]) * sqw[None, :]
    try:
        vals, vecs = eigh(M)
    except Exception as exc:  # pragma: no cover - LAPACK failure is exotic
        raise NumericError(f"eigensolver failed for R={R}, order={order}: {exc}")
    vals = vals[::-1]
    vecs = vecs[:, ::-1]

    low, high = float(vals.min()), float(vals.max())
    if low < -CLAMP_SLACK or high > 1.0 + CLAMP_SLACK:
        raise NumericError(
            f"eigenvalues escape [0,1] beyond slack: min={low:.3e}, max={high:.3e} "
            f"(R={R}, order={order})"
        )
    vals = np.clip(vals, 0.0, 1.0)

    trace_err = abs(vals.sum() - R)
    if trace_err > 1e-6 * R:
        raise NumericError(
            f"trace identity violated: |sum(mu) - R| = {trace_err:.3e} for R={R}"
        )

    # deterministic sign: largest-magnitude sample of each row is positive
    samples = (vecs / sqw[:, None]).T
    anchor = np.argmax(np.abs(samples), axis=1)
    signs = np.sign(samples[np.arange(samples.shape[0]), anchor])
    signs[signs == 0] = 1.0
    samples = samples * signs[:, None]

    vals.flags.writeable = False
    samples.flags.writeable = False
    return Spectrum1D(
        bandwidth_R=float(R),
        rule=rule,
        eigenvalues=vals,
        eigvec_samples=samples,
        n_resolved=int(np.count_nonzero(vals >= CLAMP_FLOOR)),
    )


@dataclass(frozen=True)
class SpectrumD:
    """Largest eigenvalues of the d-dimensional limiting operator.

    ``eigenvalues[n-1]`` is lambda_n (1-based as usual for the tensor
    operator) and equals the product of the 1-d eigenvalues selected by
    ``multi_indices[n-1]`` (0-based per axis).
    """

    dimension_d: int
    base: Spectrum1D
    eigenvalues: np.ndarray
    multi_indices: np.ndarray
    n_resolved: int

    @property
    def bandwidth_R(self) -> float:
        return self.base.bandwidth_R

    def counting(self, eps: float) -> int:
        return counting_function(self, eps)


def tensor_spectrum(base: Spectrum1D, d: int, count: int) -> SpectrumD:
    """The `count` largest d-fold products of the base eigenvalues.

    Products are enumerated best-first over ordered multi-indices
    (k_1, ..., k_d); ties are broken lexicographically, so the output is
    deterministic.  For d = 1 the base eigenvalues are reproduced.

    Raises
    ------
    CapacityError
        If the base spectrum cannot supply `count` products.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    mu = base.eigenvalues
    m = mu.shape[0]
    if count > m**d:
        raise CapacityError(
            f"requested {count} tensor eigenvalues but only {m}^{d} products exist"
        )

    start = (0,) * d
    heap = [(-float(np.prod(mu[list(start)])), start)]
    seen = {start}
    out_vals = np.empty(count, dtype=float)
    out_idx = np.empty((count, d), dtype=np.int64)
    got = 0
    while heap and got < count:
        neg, idx = heapq.heappop(heap)
        out_vals[got] = -neg
        out_idx[got] = idx
        got += 1
        for axis in range(d):
            if idx[axis] + 1 < m:
                nxt = idx[:axis] + (idx[axis] + 1,) + idx[axis + 1 :]
                if nxt not in seen:
                    seen.add(nxt)
                    val = float(np.prod(mu[list(nxt)]))
                    heapq.heappush(heap, (-val, nxt))
    if got < count:
        raise CapacityError(
            f"enumeration exhausted after {got} of {count} tensor eigenvalues"
        )
    out_vals.flags.writeable = False
    out_idx.flags.writeable = False
    return SpectrumD(
        dimension_d=int(d),
        base=base,
        eigenvalues=out_vals,
        multi_indices=out_idx,
        n_resolved=int(np.count_nonzero(out_vals >= CLAMP_FLOOR)),
    )


def counting_function(spec: Union[Spectrum1D, SpectrumD], eps: float) -> int:
    """card{eigenvalues >= eps}; monotone non-increasing in eps.

    Raises
    ------
    ValueError
        If eps is outside (0, 1) or below the resolution floor.
    CapacityError
        If a truncated tensor spectrum cannot certify the count.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if eps < CLAMP_FLOOR:
        raise ValueError(f"eps={eps} is below the resolution floor {CLAMP_FLOOR}")
    vals = spec.eigenvalues
    count = int(np.count_nonzero(vals >= eps))
    if isinstance(spec, SpectrumD) and count == vals.shape[0]:
        total = spec.base.eigenvalues.shape[0] ** spec.dimension_d
        if vals.shape[0] < total:
            raise CapacityError(
                "tensor spectrum truncated above eps; recompute with larger count"
            )
    return count


def fuchs_top_eigenvalue(R: float, d: int = 1) -> float:
    """Leading-order top eigenvalue 1 - 2*pi*d*sqrt(2R)*exp(-pi*R)."""
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    defect = 2.0 * math.pi * d * math.sqrt(2.0 * R) * math.exp(-math.pi * R)
    return min(1.0 - defect, np.nextafter(1.0, 0.0))


def widom_asymptotic(R: float, k: int) -> float:
    """Asymptotic eigenvalue 2*pi*(pi*R/8)**(2k+1) / (k!)**2 for large k.

    Evaluated in log space; returns exactly 0.0 when the value underflows
    double precision.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    logv = (
        math.log(2.0 * math.pi)
        + (2 * k + 1) * math.log(math.pi * R / 8.0)
        - 2.0 * math.lgamma(k + 1)
    )
    if logv < _LOG_TINY:
        return 0.0
    return math.exp(logv)


class WidomTail(NamedTuple):
    value: float
    valid: bool


def widom_tail_bound(R: float, k: int, alpha: float, kappa: float) -> WidomTail:
    """Exponential tail bound exp(-k/kappa), valid for k >= R/(1 - alpha)."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return WidomTail(value=math.exp(-k / kappa), valid=bool(k >= R / (1.0 - alpha)))


def landau_widom_reference(R: float, eps: float) -> float:
    """Leading-order eigenvalue count R + (2/pi)*log((1-eps)/eps)*log(R).

    Reference/diagnostic only: the o(log R) remainder is dropped.
    """
    if R <= 1:
        raise ValueError(f"R must exceed 1, got {R}")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return R + (2.0 / math.pi) * math.log((1.0 - eps) / eps) * math.log(R)


def calibrate_kappa(spec: Spectrum1D, alpha: float = 0.5) -> float:
    """Fit the tail-decay constant kappa so that mu_k <= exp(-k/kappa) holds
    on the computed spectrum for all resolved k >= R/(1 - alpha).

    A least-squares slope of log(mu_k) against k over the tail gives the
    scale; the result is then raised to the envelope max_k k/(-log mu_k)
    so the inequality is honored by every resolved tail eigenvalue.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    k0 = int(math.ceil(spec.bandwidth_R / (1.0 - alpha)))
    ks = np.arange(k0, spec.n_resolved)
    if ks.size < 3:
        raise CapacityError(
            f"only {ks.size} resolved tail eigenvalues beyond k={k0}; "
            "increase quadrature order"
        )
    mu = spec.eigenvalues[ks]
    logmu = np.log(mu)
    slope = float(np.dot(ks, logmu) / np.dot(ks, ks))  # through-origin fit
    kappa_ls = -1.0 / slope
    kappa_env = float(np.max(ks / (-logmu)))
    return max(kappa_ls, kappa_env)


# ---------------------------------------------------------------------------
# cache files


def _cache_key(R: float, order: int) -> str:
    return f"spectrum_R{R!r}_n{order}_v{KERNEL_VERSION}"


def save_spectrum(spec: Spectrum1D, cache_dir: str) -> str:
    """Write the spectrum as a versioned JSON record; returns the path."""
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, spec.cache_key() + ".json")
    record = {
        "format_version": 1,
        "kernel_version": KERNEL_VERSION,
        "R": spec.bandwidth_R,
        "order": spec.order,
        "eigenvalues": spec.eigenvalues.tolist(),
        "nodes": spec.rule.nodes.tolist(),
        "weights": spec.rule.weights.tolist(),
        "eigvec_samples": spec.eigvec_samples.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)
    return path


def load_spectrum(path: str) -> Spectrum1D:
    """Reload a cached spectrum and re-check its invariants."""
    with open(path, "r", encoding="utf-8") as fh:
        record = json.load(fh)
    if record.get("format_version") != 1 or record.get("kernel_version") != KERNEL_VERSION:
        raise ValueError(f"incompatible cache record at {path}")
    rule = QuadratureRule(
        order=int(record["order"]),
        nodes=np.array(record["nodes"], dtype=float),
        weights=np.array(record["weights"], dtype=float),
    )
    vals = np.array(record["eigenvalues"], dtype=float)
    samples = np.array(record["eigvec_samples"], dtype=float)
    R = float(record["R"])
    if vals.min() < 0.0 or vals.max() > 1.0 or np.any(np.diff(vals) > 0):
        raise NumericError(f"cached eigenvalues fail invariants at {path}")
    if abs(vals.sum() - R) > 1e-6 * R:
        raise NumericError(f"cached trace identity fails at {path}")
    gram = (samples * rule.weights[None, :]) @ samples.T
    if not np.allclose(gram, np.eye(rule.order), atol=1e-8):
        raise NumericError(f"cached eigenvectors lost orthonormality at {path}")
    vals.flags.writeable = False
    samples.flags.writeable = False
    return Spectrum1D(
        bandwidth_R=R,
        rule=rule,
        eigenvalues=vals,
        eigvec_samples=samples,
        n_resolved=int(np.count_nonzero(vals >= CLAMP_FLOOR)),
    )


def cached_spectrum_1d(
    R: float, order: Optional[int] = None, cache_dir: Optional[str] = None
) -> Spectrum1D:
    """Load the spectrum from `cache_dir` if present, else compute and save."""
    if order is None:
        order = default_order(R)
    if cache_dir is None:
        cache_dir = os.environ.get("PROLATE_CACHE_DIR")
    if not cache_dir:
        return compute_spectrum_1d(R, order)
    path = os.path.join(cache_dir, _cache_key(float(R), order) + ".json")
    if os.path.exists(path):
        return load_spectrum(path)
    spec = compute_spectrum_1d(R, order)
    save_spectrum(spec, cache_dir)
    return spec
