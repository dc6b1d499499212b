"""Explicit constants and probability bounds for the restricted sampling
inequality.

Everything here is a closed-form evaluation: covering numbers of the
concentrated class, the constants of the chaining argument, the two
Bernstein-type tail bounds, and the sample-count estimate.  Covering
numbers and the prefactor A of the uniform deviation inequality overflow
double precision almost immediately, so all such quantities are carried in
log space; probability outputs are clipped and flagged vacuous instead of
silently saturating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import CapacityError
from .spectrum import SpectrumD, calibrate_kappa

_LOG2 = math.log(2.0)
_SQRT2 = math.sqrt(2.0)


def delta_feasibility(R: float, d: int) -> float:
    """Smallest concentration defect 2*pi*d*sqrt(2R)*exp(-pi*R) any unit-norm
    band function must carry; below it the class B(R, delta) is empty."""
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    return 2.0 * math.pi * d * math.sqrt(2.0 * R) * math.exp(-math.pi * R)


def norm_comparison_constant(d: int) -> float:
    """Constant K_d of the local sup/L2 norm comparison, O(d) in the dimension.

    K_d = 2 * (2**(d-1) * (d+1)*(d+2) / sigma_{d-1})**(1/(d+2)) * (pi*sqrt(d))**(d/(d+2))
    with sigma_{d-1} the surface area of the unit sphere in R^d.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    sigma = d * math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    inner = 2.0 ** (d - 1) * (d + 1) * (d + 2) / sigma
    return 2.0 * inner ** (1.0 / (d + 2)) * (math.pi * math.sqrt(d)) ** (d / (d + 2))


def covering_number_l2(R: float, delta: float, eps: float, d: int, kappa: float) -> float:
    """log of the covering number of the restricted class in the local L2 norm:

    log N_2(eps) <= 2**(d+1) * (R + kappa*log(2*sqrt(delta)/eps))**d * log(4*sqrt(2)/eps)
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    inner = max(R + kappa * math.log(2.0 * math.sqrt(delta) / eps), 0.0)
    return 2.0 ** (d + 1) * inner**d * max(math.log(4.0 * _SQRT2 / eps), 0.0)


def covering_number_sup(
    R: float, eps: float, d: int, kappa: float, K_d: Optional[float] = None
) -> float:
    """log of the covering number in the local sup norm:

    log N(eps) <= 2**(d+1) * (R + kappa*(d/2+1)*log(2*K_d/eps))**d * log(4*K_d/eps)
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if K_d is None:
        K_d = norm_comparison_constant(d)
    inner = max(R + kappa * (d / 2.0 + 1.0) * math.log(2.0 * K_d / eps), 0.0)
    return 2.0 ** (d + 1) * inner**d * max(math.log(4.0 * K_d / eps), 0.0)


def p_poly(ell: int, R: float, d: int, kappa: float, K_d: Optional[float] = None) -> float:
    """Degree-(d+1) polynomial exponent of the dyadic net sizes:

    p(ell) = 2**(d+1) * (R + (d/2+1)*kappa*((ell+1)*log2 + log K_d))**d
             * ((ell+2)*log2 + log K_d)
    """
    if K_d is None:
        K_d = norm_comparison_constant(d)
    lk = math.log(K_d)
    inner = R + (d / 2.0 + 1.0) * kappa * ((ell + 1) * _LOG2 + lk)
    return 2.0 ** (d + 1) * inner**d * ((ell + 2) * _LOG2 + lk)


class TruncationResult(NamedTuple):
    D: int
    closed_form_bound: float
    degenerate: bool


def truncation_dimension(
    R: float,
    d: int,
    delta: float,
    eps: float,
    spec: SpectrumD,
    kappa: Optional[float] = None,
) -> TruncationResult:
    """Minimal D with lambda_{D+1} < eps^2 / (4*delta), from the computed
    spectrum, next to the closed-form bound 2**d * (R + kappa*log(2*sqrt(delta)/eps))**d.

    A threshold above the top eigenvalue is degenerate (the whole class is
    already eps-small); it is reported as D = 1 with the flag set.
    """
    if not (0.0 < eps):
        raise ValueError(f"eps must be positive, got {eps}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    threshold = eps**2 / (4.0 * delta)
    lam = spec.eigenvalues
    if kappa is None:
        kappa = calibrate_kappa(spec.base)
    bound = 2.0**d * max(R + kappa * math.log(2.0 * math.sqrt(delta) / eps), 0.0) ** d
    if lam[0] < threshold:
        return TruncationResult(D=1, closed_form_bound=bound, degenerate=True)
    above = int(np.count_nonzero(lam >= threshold))
    if above == lam.shape[0]:
        raise CapacityError(
            f"spectrum truncated above the threshold {threshold:.3e}; "
            "recompute with a larger count"
        )
    return TruncationResult(D=above, closed_form_bound=bound, degenerate=False)


class ChainConstants(NamedTuple):
    c1: float
    ell_star: int
    c2: float
    log_A: float
    B: float


def _c1_minimum(ell_max: int = 64) -> Tuple[float, int]:
    ells = np.arange(2, ell_max + 1)
    vals = 2.0 ** (ells / 2.0) / (8.0 * ells**2)
    i = int(np.argmin(vals))
    return float(vals[i]), int(ells[i])


def chain_constants(
    R: float, d: int, kappa: float, K_d: Optional[float] = None
) -> ChainConstants:
    """Constants of the dyadic chaining tail estimate.

    c1 = min_{ell>=2} 2**(ell/2) / (8*ell^2) = 1/36, attained at ell = 6;
    c2 = max_{ell>=2} 2*p(ell) / 2**(ell/2), a finite search whose tail is
    certified by the ratio test (p grows polynomially, the denominator
    geometrically); B = min(3, sqrt(2)*c1); A is returned in log form as
    log A = max(log N(1/2), sqrt(2)*c2).
    """
    if K_d is None:
        K_d = norm_comparison_constant(d)
    c1, ell_star = _c1_minimum()
    # beyond ell0 the terms 2*p(ell)/2**(ell/2) are strictly decreasing:
    # p(ell+1)/p(ell) <= (1 + 1/ell)**(d+1) < sqrt(2) once ell > ell0
    ell0 = int(math.ceil((d + 1) / (2.0 ** (1.0 / (2.0 * (d + 1))) - 1.0)))
    ells = np.arange(2, max(ell0, 2) + 2)
    terms = np.array([2.0 * p_poly(int(l), R, d, kappa, K_d) / 2.0 ** (l / 2.0) for l in ells])
    c2 = float(terms.max())
    log_A = max(covering_number_sup(R, 0.5, d, kappa, K_d), _SQRT2 * c2)
    B = min(3.0, _SQRT2 * c1)
    return ChainConstants(c1=c1, ell_star=ell_star, c2=c2, log_A=log_A, B=B)


def fit_exponent_scale(
    d: int, kappa: float, Rs: Sequence[float] = (4.0, 8.0, 16.0)
) -> float:
    """Scale C with log A <= C * R^d across the given bandwidths (upper envelope)."""
    K_d = norm_comparison_constant(d)
    return max(chain_constants(R, d, kappa, K_d).log_A / R**d for R in Rs)


@dataclass(frozen=True)
class TheoryParams:
    """Bundle of the explicit constants for one (R, d, kappa) configuration.

    A is astronomically large at any interesting R, so only log_A is stored.
    """

    R: float
    d: int
    kappa: float
    alpha: float
    K_d: float
    c1: float
    c2: float
    log_A: float
    B: float
    C: float
    c4: float


def theory_params(
    R: float,
    d: int,
    kappa: float,
    alpha: float = 0.5,
    C: Optional[float] = None,
) -> TheoryParams:
    """Evaluate every constant for the given configuration.

    C (the scale in log A <= C*R^d) is fitted over R in {4, 8, 16} when not
    supplied.  c4 is the threshold scale (c2 + 2**1.5/log 2) / c1 entering
    the validity condition of the deviation bound.
    """
    K_d = norm_comparison_constant(d)
    cc = chain_constants(R, d, kappa, K_d)
    if C is None:
        C = fit_exponent_scale(d, kappa)
    c4 = (cc.c2 + 2.0**1.5 / _LOG2) / cc.c1
    return TheoryParams(
        R=float(R),
        d=int(d),
        kappa=float(kappa),
        alpha=float(alpha),
        K_d=K_d,
        c1=cc.c1,
        c2=cc.c2,
        log_A=cc.log_A,
        B=cc.B,
        C=float(C),
        c4=c4,
    )


class BoundResult(NamedTuple):
    probability: float
    log_value: float
    vacuous: bool


def deviation_bound(lam: float, r: int, R: float, d: int, log_A: float, B: float) -> BoundResult:
    """Uniform deviation tail min(1, 2*A*exp(-B*lam^2/(41*r*R^-d + lam))).

    log_value is log(2A) minus the exponent, uncapped; the probability is
    clipped to 1 and flagged vacuous when the raw bound is not below 1.
    """
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    denom = 41.0 * r * R ** (-d) + lam
    expo = 0.0 if denom == 0.0 else B * lam**2 / denom
    logv = _LOG2 + log_A - expo
    return BoundResult(
        probability=min(1.0, math.exp(min(logv, 0.0))),
        log_value=logv,
        vacuous=bool(logv >= 0.0),
    )


def deviation_validity_threshold(r: int, R: float, d: int, c4: float) -> float:
    """Smallest lam for which the chaining sum behind the deviation bound is
    controlled: lam >= c4 + sqrt(41*c4*r*R^-d)."""
    return c4 + math.sqrt(41.0 * c4 * r * R ** (-d))


def sampling_probability_bound(
    r: int, R: float, d: int, mu: float, log_A: float, B: float
) -> BoundResult:
    """Success probability max(0, 1 - 2*A*exp(-B*(r/R^d)*mu^2/(41+mu))).

    Vacuous (probability 0) whenever the failure term is not below 1.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    expo = B * (r / R**d) * mu**2 / (41.0 + mu)
    log_fail = _LOG2 + log_A - expo
    fail = math.exp(min(log_fail, 0.0))
    return BoundResult(
        probability=max(0.0, 1.0 - fail) if log_fail < 0.0 else 0.0,
        log_value=log_fail,
        vacuous=bool(log_fail >= 0.0),
    )


def min_samples(R: float, d: int, mu: float, eps: float, B: float, C: float) -> int:
    """Sample count guaranteeing the restricted inequality with probability
    1 - eps:  ceil(R^d*(41+mu)/(B*mu^2) * (log(2/eps) + C*R^d)),  O(R^{2d})."""
    if not (0.0 < mu):
        raise ValueError(f"mu must be positive, got {mu}")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return int(math.ceil(R**d * (41.0 + mu) / (B * mu**2) * (math.log(2.0 / eps) + C * R**d)))


class BernsteinBound(NamedTuple):
    value: float
    vacuous: bool


def bernstein_bound(lam: float, r: int, sigma2: float, M: float) -> BernsteinBound:
    """Tail bound 2*exp(-lam^2 / (2*r*sigma2 + (2/3)*M*lam)) for sums of r
    independent centered variables with variance <= sigma2 and sup <= M.

    The raw value lies in (0, 2]; it is reported as-is with a vacuous flag
    when it is not below 1.
    """
    if sigma2 <= 0 or M <= 0:
        raise ValueError("sigma2 and M must be positive")
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    denom = 2.0 * r * sigma2 + (2.0 / 3.0) * M * lam
    value = 2.0 * math.exp(-(lam**2) / denom) if denom > 0 else 2.0
    return BernsteinBound(value=value, vacuous=bool(value >= 1.0))


def geometric_tail_bound(p: float, a: float) -> float:
    """Upper bound exp(-a*p) / (p*a*log(a)) for the series
    sum_{ell >= 2} exp(-a**ell * p), valid for p > 0 and a > 1."""
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if a <= 1.0:
        raise ValueError(f"a must exceed 1, got {a}")
    return math.exp(-a * p) / (p * a * math.log(a))
