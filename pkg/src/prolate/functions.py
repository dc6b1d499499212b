"""Bandlimited functions represented over the prolate eigenbasis.

A function is a finite complex coefficient vector over the top-D
eigenfunctions of the d-dimensional limiting operator.  Eigenfunctions are
known through their frequency-side samples at the quadrature nodes, so
time-domain evaluation is the quadrature sum

    f(x) = sum_n c_n * phi_n(x),
    phi_n(x) = prod_axis sum_i w_i * v_{k_axis}[i] * exp(2*pi*1j * x_axis * xi_i).

One representation serves evaluation, norms, sampling sums and plotting.
The module also builds the closed-form adversarial function used by the
negative-result simulations: a sine factor times the inverse transform of a
smooth bump, vanishing at every even integer with spectrum inside
[-1/2, 1/2].
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import _accel
from .errors import NumericError, SamplingError
from .rng import master_rng
from .spectrum import SpectrumD, cached_spectrum_1d, tensor_spectrum
from .theory import delta_feasibility

_UNIT_NORM_TOL = 1e-9
_LOCAL_RTOL = 1e-6
_EVAL_BLOCK = 1 << 15


def _as_points(points, d: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if d == 1 and pts.ndim <= 1:
        pts = pts.reshape(-1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != d:
        raise ValueError(f"points must have shape (n, {d}), got {np.shape(points)}")
    return pts


def basis_values(spectrum: SpectrumD, D: int, points) -> np.ndarray:
    """Matrix phi[n, j] of the first D basis functions at the given points."""
    if not (1 <= D <= spectrum.eigenvalues.shape[0]):
        raise ValueError(f"D must lie in [1, {spectrum.eigenvalues.shape[0]}], got {D}")
    d = spectrum.dimension_d
    pts = _as_points(points, d)
    idx = spectrum.multi_indices[:D]
    kmax = int(idx.max()) + 1
    base = spectrum.base
    wv = base.eigvec_samples[:kmax] * base.rule.weights[None, :]
    phi = None
    for axis in range(d):
        per_axis = _accel.basis_matrix(wv, base.rule.nodes, pts[:, axis])
        contrib = per_axis[idx[:, axis]]
        phi = contrib if phi is None else phi * contrib
    return phi


class SupEstimate(NamedTuple):
    value: float
    error_bound: float


class BandlimitedFunction:
    """Finite prolate expansion; immutable after construction."""

    def __init__(self, spectrum: SpectrumD, coefficients):
        coeffs = np.array(coefficients, dtype=np.complex128)
        if coeffs.ndim != 1 or coeffs.shape[0] < 1:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        if coeffs.shape[0] > spectrum.eigenvalues.shape[0]:
            raise ValueError(
                f"{coeffs.shape[0]} coefficients exceed the {spectrum.eigenvalues.shape[0]} "
                "available eigenvalues"
            )
        coeffs.flags.writeable = False
        self.spectrum = spectrum
        self.coefficients = coeffs

    @property
    def truncation(self) -> int:
        return self.coefficients.shape[0]

    @property
    def bandwidth_R(self) -> float:
        return self.spectrum.bandwidth_R

    @classmethod
    def from_frequency_samples(cls, spectrum: SpectrumD, samples) -> "BandlimitedFunction":
        """Project frequency-side node samples onto the full 1-d eigenbasis.

        Exact for any sample vector when the spectrum carries all base
        eigenvalues, because the weighted eigenvector rows form a complete
        orthonormal system on the nodes.  Only available for d = 1.
        """
        if spectrum.dimension_d != 1:
            raise ValueError("frequency-sample construction requires d = 1")
        base = spectrum.base
        if spectrum.eigenvalues.shape[0] != base.order:
            raise ValueError("spectrum must carry all base eigenvalues (count = order)")
        samples = np.asarray(samples, dtype=np.complex128)
        if samples.shape != (base.order,):
            raise ValueError(f"need {base.order} node samples, got {samples.shape}")
        rows = spectrum.multi_indices[:, 0]
        coeffs = (base.eigvec_samples[rows] * base.rule.weights[None, :]) @ samples
        return cls(spectrum, coeffs)

    def evaluate(self, points):
        """Evaluate at one point (complex scalar) or many (complex array)."""
        d = self.spectrum.dimension_d
        scalar = (d == 1 and np.ndim(points) == 0) or (
            d > 1 and np.ndim(points) == 1 and np.shape(points) == (d,)
        )
        pts = _as_points(points, d)
        out = np.empty(pts.shape[0], dtype=np.complex128)
        for lo in range(0, pts.shape[0], _EVAL_BLOCK):
            hi = min(lo + _EVAL_BLOCK, pts.shape[0])
            phi = basis_values(self.spectrum, self.truncation, pts[lo:hi])
            out[lo:hi] = self.coefficients @ phi
        return complex(out[0]) if scalar else out

    def norm_l2(self) -> float:
        """Global L2 norm: the Euclidean norm of the coefficients."""
        return float(np.linalg.norm(self.coefficients))

    def local_energy_coefficient(self) -> float:
        """Energy on the cube via the eigenvalue-weighted coefficient sum."""
        lam = self.spectrum.eigenvalues[: self.truncation]
        return float(np.dot(np.abs(self.coefficients) ** 2, lam))

    def local_energy_quadrature(self, order_per_axis: int = 128) -> float:
        """Energy on the cube by direct Gauss-Legendre integration of |f|^2."""
        d = self.spectrum.dimension_d
        R = self.bandwidth_R
        x, w = np.polynomial.legendre.leggauss(order_per_axis)
        x = x * (R / 2.0)
        w = w * (R / 2.0)
        axes = np.meshgrid(*([x] * d), indexing="ij")
        pts = np.stack([a.ravel() for a in axes], axis=1)
        vals = np.abs(self.evaluate(pts)) ** 2
        wgt = np.ones(1)
        for _ in range(d):
            wgt = np.multiply.outer(wgt, w).ravel()
        return float(np.dot(wgt, vals))

    def norm_l2_local(self, check: bool = True) -> float:
        """Norm over the cube; cross-checked against direct integration.

        Raises NumericError when the coefficient formula and the quadrature
        integral disagree beyond 1e-6 relative (a symptom of an unresolved
        spectrum).
        """
        coef = self.local_energy_coefficient()
        if check:
            quad = self.local_energy_quadrature()
            scale = max(coef, quad, 1e-300)
            if abs(coef - quad) > _LOCAL_RTOL * scale:
                raise NumericError(
                    f"local energy mismatch: coefficient {coef:.12e} vs "
                    f"quadrature {quad:.12e}"
                )
        return math.sqrt(max(coef, 0.0))

    def norm_sup_local(self, grid_step: float) -> SupEstimate:
        """Max of |f| over a grid on the cube, plus a certified error bound.

        The gradient of a unit-band function is bounded by pi*sqrt(d) times
        its L2 norm, which controls the value between grid points; the step
        must not exceed 1/(4*pi*sqrt(d)).
        """
        d = self.spectrum.dimension_d
        R = self.bandwidth_R
        limit = 1.0 / (4.0 * math.pi * math.sqrt(d))
        if grid_step > limit:
            raise ValueError(f"grid_step {grid_step} exceeds {limit:.6f}")
        n_axis = int(math.ceil(R / grid_step)) + 1
        xs = np.linspace(-R / 2.0, R / 2.0, n_axis)
        eff_step = R / (n_axis - 1)
        axes = np.meshgrid(*([xs] * d), indexing="ij")
        pts = np.stack([a.ravel() for a in axes], axis=1)
        best = 0.0
        for lo in range(0, pts.shape[0], _EVAL_BLOCK):
            hi = min(lo + _EVAL_BLOCK, pts.shape[0])
            best = max(best, float(np.abs(self.evaluate(pts[lo:hi])).max()))
        err = eff_step * math.pi * math.sqrt(d) * self.norm_l2() / 2.0
        return SupEstimate(value=best, error_bound=err)


@dataclass(frozen=True)
class ConcentrationClass:
    """Unit-norm functions holding at least 1 - delta of their energy on the cube."""

    R: float
    delta: float
    d: int = 1

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        floor = delta_feasibility(self.R, self.d)
        if self.delta < floor:
            warnings.warn(
                f"delta={self.delta} lies below the feasibility bound {floor:.3e}; "
                "the class may be empty",
                stacklevel=2,
            )


def membership(f: BandlimitedFunction, cls: ConcentrationClass) -> bool:
    """Unit norm within 1e-9 and cube energy at least 1 - delta."""
    if abs(f.norm_l2() - 1.0) > _UNIT_NORM_TOL:
        return False
    return f.local_energy_coefficient() >= 1.0 - cls.delta


def sample_random_member(
    cls: ConcentrationClass,
    spectrum: SpectrumD,
    D: int,
    seed: int,
    max_rejects: int = 100,
) -> BandlimitedFunction:
    """Random unit-norm member supported on the top-D eigenspace.

    Gaussian coefficients are drawn and accepted when concentrated enough;
    after `max_rejects` rejections the last draw is blended toward the top
    eigenfunction by the minimal convex mixing that meets the constraint
    (a documented bias toward concentration).  Deterministic per seed.
    """
    lam = spectrum.eigenvalues[:D]
    if lam.shape[0] < D:
        raise ValueError(f"spectrum carries {lam.shape[0]} eigenvalues, need {D}")
    target = 1.0 - cls.delta
    rng = master_rng(seed)
    best_conc = -np.inf
    c = None
    for _ in range(max_rejects):
        c = rng.standard_normal(D) + 1j * rng.standard_normal(D)
        c /= np.linalg.norm(c)
        conc = float(np.dot(np.abs(c) ** 2, lam))
        best_conc = max(best_conc, conc)
        if conc >= target:
            return BandlimitedFunction(spectrum, c)
    if lam[0] < target:
        raise SamplingError(
            f"class B(R={cls.R}, delta={cls.delta}) is infeasible on this spectrum: "
            f"top eigenvalue {lam[0]:.6g} < {target:.6g}; best draw {best_conc:.6g}",
            achieved=best_conc,
        )
    e1 = np.zeros(D, dtype=np.complex128)
    e1[0] = 1.0

    def conc_at(t: float) -> float:
        v = (1.0 - t) * c + t * e1
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            return -np.inf
        v = v / nrm
        return float(np.dot(np.abs(v) ** 2, lam))

    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if conc_at(mid) >= target:
            hi = mid
        else:
            lo = mid
    v = (1.0 - hi) * c + hi * e1
    v /= np.linalg.norm(v)
    return BandlimitedFunction(spectrum, v)


def full_spectrum_1d(
    R: float, order: Optional[int] = None, cache_dir: Optional[str] = None
) -> SpectrumD:
    """d = 1 spectrum wrapper carrying every base eigenvalue."""
    base = cached_spectrum_1d(R, order, cache_dir)
    return tensor_spectrum(base, 1, base.order)


# ---------------------------------------------------------------------------
# serialization


def save_function(f: BandlimitedFunction, path: str) -> None:
    spec = f.spectrum
    record = {
        "format_version": 1,
        "spectrum_key": {
            "R": spec.bandwidth_R,
            "order": spec.base.order,
            "d": spec.dimension_d,
            "count": int(spec.eigenvalues.shape[0]),
        },
        "truncation": f.truncation,
        "coefficients": [[z.real, z.imag] for z in f.coefficients],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)


def load_function(path: str, cache_dir: Optional[str] = None) -> BandlimitedFunction:
    with open(path, "r", encoding="utf-8") as fh:
        record = json.load(fh)
    if record.get("format_version") != 1:
        raise ValueError(f"incompatible function record at {path}")
    key = record["spectrum_key"]
    base = cached_spectrum_1d(key["R"], key["order"], cache_dir)
    spec = tensor_spectrum(base, key["d"], key["count"])
    pairs = np.array(record["coefficients"], dtype=float)
    coeffs = pairs[:, 0] + 1j * pairs[:, 1]
    if coeffs.shape[0] != record["truncation"]:
        raise ValueError(f"truncation mismatch in {path}")
    return BandlimitedFunction(spec, coeffs)


# ---------------------------------------------------------------------------
# closed-form adversarial function


def _smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly monotone between."""
    t = np.asarray(t, dtype=float)
    up = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    down = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return up / (up + down)


@dataclass(frozen=True)
class BumpParams:
    """Shape of the frequency-side bump: 1 on [-plateau, plateau], 0 outside
    [-support, support], smooth monotone ramps between."""

    support_half: float = 0.25
    plateau_half: float = 0.125
    quad_order: int = 800
    profile: Optional[Callable] = None


@dataclass(frozen=True)
class ClosedFormFunction:
    """Closed-form bandlimited function with measured envelope constants.

    ``value`` evaluates F; |F(x)| <= decay_c1 / (1 + x^2) holds on the
    verification grid, deriv_c2 bounds |F'| there, and band_residual is the
    largest out-of-band Fourier magnitude found by the quadrature oracle.
    """

    value: Callable
    envelope: Callable
    bump: Callable
    l2_norm: float
    decay_c1: float
    deriv_c2: float
    band_residual: float
    support_half: float

    @property
    def l2_norm_sq(self) -> float:
        return self.l2_norm**2


# margin applied to grid maxima so the measured constants dominate values
# between grid points (grids are fine enough that this is generous)
_GRID_MARGIN = 1.02

_RESIDUAL_TOL = 1e-8
_RESIDUAL_HALF_RANGE = 192
_RESIDUAL_PANEL_ORDER = 24
_PROBE_FREQS = (0.51, 0.55, 0.6, 0.75, 1.0, 1.5, 2.0)


def adversarial_bump_function(params: BumpParams = BumpParams()) -> ClosedFormFunction:
    """Build F(x) = sin(pi*x/2) * Psi(x) with Psi the inverse transform of
    the bump.

    The sine factor places the spectrum inside [-1/2, 1/2] (two shifts of
    the bump by +-1/4) and forces F(2j) = 0 at every even integer j,
    including j = 0.  Decay and derivative constants are measured on fine
    verification grids; the out-of-band Fourier residual is checked by an
    independent panel-quadrature transform.
    """
    s = params.support_half
    p = params.plateau_half
    if not (0.125 - 1e-12 <= p < s <= 0.25 + 1e-12):
        raise ValueError(
            f"need 1/8 <= plateau_half < support_half <= 1/4, got ({p}, {s})"
        )

    if params.profile is not None:
        psi = params.profile
    else:

        def psi(xi):
            xi = np.asarray(xi, dtype=float)
            return _smoothstep((s - np.abs(xi)) / (s - p))

    probe = np.linspace(-0.5, 0.5, 4001)
    pvals = np.asarray(psi(probe), dtype=float)
    if np.any(pvals < -1e-15):
        raise ValueError("bump must be nonnegative")
    if np.any(np.abs(pvals[np.abs(probe) >= s + 1e-9]) > 1e-15):
        raise ValueError(f"bump must vanish outside [-{s}, {s}]")
    if np.any(np.abs(pvals[np.abs(probe) <= p - 1e-9] - 1.0) > 1e-12):
        raise ValueError(f"bump must equal 1 on [-{p}, {p}]")

    gx, gw = np.polynomial.legendre.leggauss(params.quad_order)
    nodes = gx * s
    weights = gw * s
    pv = np.asarray(psi(nodes), dtype=float)
    wpv = weights * pv
    wpv_d = weights * pv * (2.0 * np.pi * nodes)

    def envelope(xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        out = np.empty(xs.shape)
        for lo in range(0, xs.size, 4096):
            hi = min(lo + 4096, xs.size)
            out[lo:hi] = wpv @ np.cos(2.0 * np.pi * np.outer(nodes, xs[lo:hi]))
        return out

    def envelope_deriv(xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        out = np.empty(xs.shape)
        for lo in range(0, xs.size, 4096):
            hi = min(lo + 4096, xs.size)
            out[lo:hi] = -(wpv_d @ np.sin(2.0 * np.pi * np.outer(nodes, xs[lo:hi])))
        return out

    def value(xs):
        arr = np.atleast_1d(np.asarray(xs, dtype=float))
        out = np.sin(np.pi * arr / 2.0) * envelope(arr)
        return float(out[0]) if np.ndim(xs) == 0 else out

    # L2 norm from the frequency side: the two bump shifts have disjoint
    # interiors, so ||F||^2 = (1/4) * integral of (psi(.-1/4) - psi(.+1/4))^2
    fx, fw = np.polynomial.legendre.leggauss(params.quad_order)
    fq = fx * 0.5
    fwq = fw * 0.5
    l2_sq = float(np.dot(fwq, 0.25 * (psi(fq - 0.25) - psi(fq + 0.25)) ** 2))

    # derivative bound, measured where the envelope is non-negligible
    step = 1.0 / 256.0
    xd = np.arange(-48.0, 48.0 + step, step)
    fprime = (np.pi / 2.0) * np.cos(np.pi * xd / 2.0) * envelope(xd) + np.sin(
        np.pi * xd / 2.0
    ) * envelope_deriv(xd)
    c2 = _GRID_MARGIN * float(np.abs(fprime).max())

    # quadratic-decay constant on the verification grid
    cstep = 1.0 / 128.0
    xc = np.arange(-100.0, 100.0 + cstep, cstep)
    fv = np.abs(np.sin(np.pi * xc / 2.0) * envelope(xc))
    c1 = _GRID_MARGIN * float(np.max(fv * (1.0 + xc**2)))

    # out-of-band residual via an independent panel-quadrature transform
    px, pw = np.polynomial.legendre.leggauss(_RESIDUAL_PANEL_ORDER)
    centers = np.arange(-_RESIDUAL_HALF_RANGE, _RESIDUAL_HALF_RANGE)
    pts = (centers[:, None] + 0.5 + 0.5 * px[None, :]).ravel()
    pwts = np.tile(0.5 * pw, centers.shape[0])
    fvals = np.sin(np.pi * pts / 2.0) * envelope(pts)
    residual = 0.0
    for xi0 in _PROBE_FREQS:
        fhat = np.dot(pwts * fvals, np.exp(-2j * np.pi * pts * xi0))
        residual = max(residual, abs(fhat))
    if residual > _RESIDUAL_TOL:
        raise NumericError(
            f"out-of-band Fourier residual {residual:.3e} exceeds {_RESIDUAL_TOL}"
        )

    return ClosedFormFunction(
        value=value,
        envelope=envelope,
        bump=psi,
        l2_norm=math.sqrt(l2_sq),
        decay_c1=c1,
        deriv_c2=c2,
        band_residual=residual,
        support_half=s,
    )
