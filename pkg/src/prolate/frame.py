"""Empirical sampling sums, restricted lower frame bounds, and Monte Carlo
deviation experiments.

The sampling sum of a function over a point set is a quadratic form c*Gc in
its coefficients, with G the Gram matrix of the basis at the points.  The
restricted lower frame bound over the concentrated class is therefore a
quadratic minimization on the unit sphere with one quadratic concentration
constraint, solved by bisection along the Lagrangian path tau -> smallest
eigenpair of G - tau*diag(lambda).

The two experiment drivers draw i.i.d. uniform points on the cube per
trial, evaluate a fixed net of random class members (plus the optimizer
certificate), and aggregate event frequencies next to the theoretical
bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from .errors import NumericError
from .functions import (
    BandlimitedFunction,
    ConcentrationClass,
    basis_values,
    sample_random_member,
)
from .points import PointSet, iid_uniform_cube
from .rng import stream_rng
from .spectrum import SpectrumD, cached_spectrum_1d, calibrate_kappa, tensor_spectrum
from .theory import (
    BoundResult,
    chain_constants,
    deviation_bound,
    sampling_probability_bound,
    truncation_dimension,
)


def sample_sum(f: BandlimitedFunction, X: PointSet) -> float:
    """Sum of |f(x_j)|^2 over the point set."""
    if X.n_points == 0:
        return 0.0
    return float(np.sum(np.abs(f.evaluate(X.points)) ** 2))


def gram_at_points(spec: SpectrumD, D: int, X: PointSet) -> np.ndarray:
    """Hermitian PSD matrix G with c*Gc = sum_j |f(x_j)|^2 for coefficients c.

    G[m, n] = sum_j conj(phi_m(x_j)) * phi_n(x_j); the conjugate sits on the
    first index so the vdot-style quadratic form reproduces the sampling sum.
    """
    if X.n_points == 0:
        return np.zeros((D, D), dtype=np.complex128)
    phi = basis_values(spec, D, X.points)
    G = phi.conj() @ phi.T
    return 0.5 * (G + G.conj().T)


class RestrictedMin(NamedTuple):
    value: float
    minimizer: np.ndarray
    unconstrained: bool
    multiplier: float


def restricted_lower_bound(
    G: np.ndarray, lam: np.ndarray, delta: float, tol: float = 1e-8
) -> RestrictedMin:
    """Approximate min of c*Gc over {|c| = 1, c*diag(lam)c >= 1 - delta}.

    Follows the Lagrangian path: for tau >= 0 take the smallest eigenpair
    of G - tau*diag(lam) and bisect tau until the concentration constraint
    is active within `tol` (or the unconstrained minimizer is already
    feasible).  When the smallest eigenvalue crosses a degeneracy and the
    eigenvector jumps across the constraint surface, the two bracketing
    eigenvectors are mixed to land on the surface; ties break toward the
    larger multiplier.

    Raises ValueError when the feasible set is empty (lam_1 < 1 - delta).
    """
    G = np.asarray(G)
    lam = np.asarray(lam, dtype=float)
    D = lam.shape[0]
    if G.shape != (D, D):
        raise ValueError(f"G must be ({D}, {D}), got {G.shape}")
    target = 1.0 - delta
    if lam[0] < target:
        raise ValueError(
            f"infeasible class: top eigenvalue {lam[0]:.6g} below 1 - delta = {target:.6g}"
        )

    def smallest(tau: float) -> np.ndarray:
        vals, vecs = eigh(G - tau * np.diag(lam))
        return vecs[:, 0]

    def concentration(c: np.ndarray) -> float:
        return float(np.real(np.vdot(c, lam * c)))

    def objective(c: np.ndarray) -> float:
        return float(np.real(np.vdot(c, G @ c)))

    c0 = smallest(0.0)
    if concentration(c0) >= target - tol:
        return RestrictedMin(objective(c0), c0, unconstrained=True, multiplier=0.0)

    lam_pos = lam[lam > 0]
    if lam_pos.size == 0:
        raise ValueError("concentration constraint is identically zero")
    gnorm = float(np.linalg.norm(G, 2))
    tau_hi = gnorm / float(lam_pos.min()) + 1.0
    c_hi = smallest(tau_hi)
    for _ in range(60):
        if concentration(c_hi) >= target:
            break
        tau_hi *= 2.0
        c_hi = smallest(tau_hi)
    else:
        raise NumericError("no feasible point found along the Lagrangian path")

    tau_lo, c_lo = 0.0, c0
    for _ in range(200):
        mid = 0.5 * (tau_lo + tau_hi)
        c_mid = smallest(mid)
        res = concentration(c_mid) - target
        if abs(res) <= tol:
            return RestrictedMin(objective(c_mid), c_mid, unconstrained=False, multiplier=mid)
        if res < 0.0:
            tau_lo, c_lo = mid, c_mid
        else:
            tau_hi, c_hi = mid, c_mid
        if tau_hi - tau_lo <= 1e-14 * (1.0 + tau_hi):
            break

    # eigenvector jumped across the surface: mix the bracketing vectors
    lo_s, hi_s = 0.0, 1.0
    for _ in range(60):
        mid_s = 0.5 * (lo_s + hi_s)
        v = (1.0 - mid_s) * c_lo + mid_s * c_hi
        nrm = np.linalg.norm(v)
        if nrm < 1e-12 or concentration(v / nrm) < target:
            lo_s = mid_s
        else:
            hi_s = mid_s
    v = (1.0 - hi_s) * c_lo + hi_s * c_hi
    v = v / np.linalg.norm(v)
    return RestrictedMin(objective(v), v, unconstrained=False, multiplier=tau_hi)


def restricted_upper_bound(
    G: np.ndarray, lam: np.ndarray, delta: float, tol: float = 1e-8
) -> float:
    """Approximate max of c*Gc over the same feasible set (negated minimum)."""
    return -restricted_lower_bound(-np.asarray(G), lam, delta, tol).value


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class FrameConfig:
    R: float = 4.0
    d: int = 1
    delta: float = 0.2
    mu: float = 0.5
    r: int = 2000
    trials: int = 500
    net_size: int = 200
    seed: int = 0
    D: Optional[int] = None
    order: Optional[int] = None
    eps_truncation: float = 0.1
    tensor_count: int = 400
    cache_dir: Optional[str] = None


@dataclass(frozen=True)
class FrameReport:
    """Per-trial normalized sampling-sum extrema and the event frequency.

    The event per trial is the two-sided inequality
    1 - delta - mu <= (R^d/r) * sum_j |f(x_j)|^2 <= 1 + mu over the test
    family (net members plus the optimizer certificates).
    """

    config: dict
    D: int
    kappa: float
    min_norm_sums: np.ndarray
    max_norm_sums: np.ndarray
    event_holds: np.ndarray
    failure_rate: float
    failure_stderr: float
    theory: BoundResult
    trial_seeds: Tuple[int, ...]


def _experiment_spectrum(cfg) -> Tuple[SpectrumD, int, float]:
    base = cached_spectrum_1d(cfg.R, cfg.order, cfg.cache_dir)
    spec = tensor_spectrum(base, cfg.d, min(cfg.tensor_count, base.order**cfg.d))
    kappa = calibrate_kappa(base)
    if cfg.D is not None:
        D = cfg.D
    else:
        D = truncation_dimension(cfg.R, cfg.d, cfg.delta, cfg.eps_truncation, spec, kappa).D
    if not (1 <= D <= spec.eigenvalues.shape[0]):
        raise ValueError(f"truncation D={D} outside the computed spectrum")
    return spec, D, kappa


def _net_coefficients(cls, spec, D, net_size, seed) -> np.ndarray:
    rows = [
        sample_random_member(cls, spec, D, stream_rng(seed, 10_000 + i).integers(2**63))
        for i in range(net_size)
    ]
    return np.stack([f.coefficients for f in rows], axis=0)


def mc_frame_experiment(cfg: FrameConfig) -> FrameReport:
    """Monte Carlo frequency of the two-sided sampling event.

    Each trial draws r i.i.d. uniform points on the cube, forms normalized
    sums over a fixed net of random class members, and sharpens the
    extremes with the restricted optimizer certificates on the trial's
    Gram matrix.
    """
    cls = ConcentrationClass(cfg.R, cfg.delta, cfg.d)
    spec, D, kappa = _experiment_spectrum(cfg)
    lam = spec.eigenvalues[:D]
    net = _net_coefficients(cls, spec, D, cfg.net_size, cfg.seed)

    scale = cfg.R**cfg.d / max(cfg.r, 1)
    lower = 1.0 - cfg.delta - cfg.mu
    upper = 1.0 + cfg.mu
    mins = np.empty(cfg.trials)
    maxs = np.empty(cfg.trials)
    holds = np.empty(cfg.trials, dtype=bool)
    trial_seeds = []
    for t in range(cfg.trials):
        tseed = int(stream_rng(cfg.seed, t).integers(2**63))
        trial_seeds.append(tseed)
        X = iid_uniform_cube(cfg.R, cfg.d, cfg.r, tseed)
        if X.n_points:
            phi = basis_values(spec, D, X.points)
            sums = scale * np.sum(np.abs(net @ phi) ** 2, axis=1)
            Gn = scale * (phi.conj() @ phi.T)
            Gn = 0.5 * (Gn + Gn.conj().T)
        else:
            sums = np.zeros(net.shape[0])
            Gn = np.zeros((D, D), dtype=np.complex128)
        cert_min = restricted_lower_bound(Gn, lam, cfg.delta).value
        cert_max = restricted_upper_bound(Gn, lam, cfg.delta)
        mins[t] = min(float(sums.min()), cert_min)
        maxs[t] = max(float(sums.max()), cert_max)
        holds[t] = (mins[t] >= lower) and (maxs[t] <= upper)

    failures = float(np.mean(~holds))
    stderr = math.sqrt(max(failures * (1.0 - failures), 0.0) / cfg.trials)
    constants = chain_constants(cfg.R, cfg.d, kappa)
    theory = sampling_probability_bound(
        cfg.r, cfg.R, cfg.d, cfg.mu, constants.log_A, constants.B
    )
    return FrameReport(
        config=_config_dict(cfg),
        D=D,
        kappa=kappa,
        min_norm_sums=mins,
        max_norm_sums=maxs,
        event_holds=holds,
        failure_rate=failures,
        failure_stderr=stderr,
        theory=theory,
        trial_seeds=tuple(trial_seeds),
    )


class DeviationSample(NamedTuple):
    sup_value: float
    net_size: int
    trial_seed: int


@dataclass(frozen=True)
class DeviationConfig:
    R: float = 4.0
    d: int = 1
    delta: float = 0.2
    r: int = 500
    trials: int = 200
    net_size: int = 50
    seed: int = 0
    thresholds: Tuple[float, ...] = ()
    D: Optional[int] = None
    order: Optional[int] = None
    eps_truncation: float = 0.1
    tensor_count: int = 400
    cache_dir: Optional[str] = None


@dataclass(frozen=True)
class DeviationReport:
    config: dict
    D: int
    kappa: float
    samples: Tuple[DeviationSample, ...]
    thresholds: Tuple[float, ...]
    empirical_tails: Tuple[float, ...]
    theory_bounds: Tuple[BoundResult, ...]


def deviation_sup_experiment(cfg: DeviationConfig) -> DeviationReport:
    """Per-trial sup over the net of |sum_j Y_j(f)| with
    Y_j(f) = |f(x_j)|^2 - R^-d * (energy of f on the cube), and empirical
    tail frequencies next to the uniform deviation bound."""
    cls = ConcentrationClass(cfg.R, cfg.delta, cfg.d)
    spec, D, kappa = _experiment_spectrum(cfg)
    lam = spec.eigenvalues[:D]
    net = _net_coefficients(cls, spec, D, cfg.net_size, cfg.seed)
    means = (np.abs(net) ** 2 @ lam) * cfg.R ** (-cfg.d)

    samples = []
    for t in range(cfg.trials):
        tseed = int(stream_rng(cfg.seed, t).integers(2**63))
        X = iid_uniform_cube(cfg.R, cfg.d, cfg.r, tseed)
        phi = basis_values(spec, D, X.points)
        sums = np.sum(np.abs(net @ phi) ** 2, axis=1)
        dev = np.abs(sums - cfg.r * means)
        samples.append(DeviationSample(float(dev.max()), cfg.net_size, tseed))

    sups = np.array([s.sup_value for s in samples])
    thresholds = tuple(cfg.thresholds) or _default_thresholds(sups)
    constants = chain_constants(cfg.R, cfg.d, kappa)
    empirical = tuple(float(np.mean(sups >= lam0)) for lam0 in thresholds)
    theory = tuple(
        deviation_bound(lam0, cfg.r, cfg.R, cfg.d, constants.log_A, constants.B)
        for lam0 in thresholds
    )
    return DeviationReport(
        config=_config_dict(cfg),
        D=D,
        kappa=kappa,
        samples=tuple(samples),
        thresholds=thresholds,
        empirical_tails=empirical,
        theory_bounds=theory,
    )


def _default_thresholds(sups: np.ndarray) -> Tuple[float, ...]:
    top = float(sups.max()) if sups.size else 1.0
    return tuple(np.linspace(0.0, 1.25 * top, 6)[1:])


def _config_dict(cfg) -> dict:
    out = {}
    for key, val in vars(cfg).items():
        out[key] = val
    return out
