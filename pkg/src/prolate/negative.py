"""Numerical counterparts of the counterexample constructions.

Two mechanisms make sampling inequalities fail for unrestricted random
sets: samples can pile up near the zeros of a fixed band function (the
per-cube uniform model, conditioned on a pinning event), and Poisson sets
with slowly growing intensity develop arbitrarily large holes.  This module
sizes the pinning construction from the measured constants of the
adversarial function, simulates the conditioned model, and evaluates the
void-probability formulas with their summability diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .functions import ClosedFormFunction
from .points import log_intensity, poisson_inhomogeneous
from .rng import master_rng, stream_rng


def _quartic_tail(J: int, terms: int = 200_000) -> float:
    """Upper bound for sum over |j| >= J of 1/(1 + (|j|-1)^2)^2, J >= 1.

    Direct summation plus an integral-test remainder, so the result always
    dominates the true tail.
    """
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    js = np.arange(J, J + terms, dtype=float)
    partial = float(np.sum(1.0 / (1.0 + (js - 1.0) ** 2) ** 2))
    u = float(J + terms - 1)
    # integral of dt/(1+t^2)^2 from u to infinity
    remainder = 0.5 * (math.pi / 2.0 - math.atan(u) - u / (1.0 + u * u))
    return 2.0 * (partial + remainder)


def event_b_probability(delta: float, r: int, N: int) -> Tuple[float, float]:
    """Probability delta^(r*(2N+1)) of pinning all samples of the 2N+1
    central cubes; returned as (value, log value) since it underflows fast."""
    exponent = r * (2 * N + 1)
    logp = exponent * math.log(delta)
    value = delta**exponent if logp > math.log(np.finfo(float).tiny) else 0.0
    return value, logp


@dataclass(frozen=True)
class Prop22Setup:
    """Sized pinning construction for one target slack k.

    N is the smallest even integer whose out-of-window budget clears
    ||F||^2/(4k); delta is the largest dyadic pinning width with
    2*c2*N*r*delta < ||F||^2/(2k).
    """

    k: float
    r: int
    N: int
    delta: float
    event_b_probability: float
    log_event_b_probability: float
    rb_tail_budget: float
    rb_tail_value: float
    rb_pin_budget: float
    rb_pin_value: float
    F: ClosedFormFunction


def construct_prop22(k: float, r: int, F: ClosedFormFunction) -> Prop22Setup:
    """Size (N, delta) from the measured constants of F.

    The tail condition is checked by direct summation (with an integral
    remainder), the pinning width by scanning dyadic deltas.
    """
    if k <= 0 or r < 1:
        raise ValueError("need k > 0 and r >= 1")
    l2sq = F.l2_norm_sq
    tail_budget = l2sq / (4.0 * k)
    c1sq_r = F.decay_c1**2 * r
    N = 2
    while c1sq_r * _quartic_tail(N // 2) >= tail_budget:
        N += 2
        if N > 1_000_000:
            raise RuntimeError("tail condition unattainable; constants look wrong")
    tail_value = c1sq_r * _quartic_tail(N // 2)

    pin_budget = l2sq / (2.0 * k)
    scale = 2.0 * F.deriv_c2 * N * r
    m = 1
    while scale * 2.0**-m >= pin_budget:
        m += 1
        if m > 4000:
            raise RuntimeError("pinning condition unattainable; constants look wrong")
    delta = 2.0**-m
    prob, logp = event_b_probability(delta, r, N)
    return Prop22Setup(
        k=float(k),
        r=int(r),
        N=N,
        delta=delta,
        event_b_probability=prob,
        log_event_b_probability=logp,
        rb_tail_budget=tail_budget,
        rb_tail_value=tail_value,
        rb_pin_budget=pin_budget,
        rb_pin_value=scale * delta,
        F=F,
    )


@dataclass(frozen=True)
class Prop22Report:
    sums: np.ndarray
    threshold: float
    violations: Tuple[int, ...]
    cube_range: int
    conditioned: bool


def simulate_conditioned_B(
    setup: Prop22Setup, trials: int, seed: int, conditioned: bool = True
) -> Prop22Report:
    """Draw the per-cube uniform model on a window of cubes and evaluate the
    sampling sum of F.

    Conditioned on the pinning event, the cubes [j, j+1] for |j| <= N place
    all their samples within delta of an even integer (where F vanishes);
    cubes beyond N draw freely.  The window extends to cubes whose residual
    tail budget is below half the out-of-window allowance, so the recorded
    sums carry everything that matters.  With ``conditioned=False`` all
    cubes draw freely, which typically concentrates the sum near
    r*||F||^2 and breaks the threshold.
    """
    F = setup.F
    N, r, delta, k = setup.N, setup.r, setup.delta, setup.k
    half_budget = setup.rb_tail_budget / 2.0
    c1sq_r = F.decay_c1**2 * r
    J = N
    while c1sq_r * _quartic_tail(J) >= half_budget:
        J += 1
    anchors = np.arange(-J, J + 1)
    pinned = np.abs(anchors) <= N
    even = anchors % 2 == 0

    threshold = F.l2_norm_sq / k
    sums = np.empty(trials)
    violations = []
    for t in range(trials):
        rng = stream_rng(seed, t)
        u = rng.random(size=(anchors.shape[0], r))
        offsets = u.copy()
        if conditioned:
            offsets[pinned & even] = delta * u[pinned & even]
            offsets[pinned & ~even] = 1.0 - delta + delta * u[pinned & ~even]
        pts = (anchors[:, None] + offsets).ravel()
        total = float(np.sum(F.value(pts) ** 2))
        sums[t] = total
        if conditioned and total >= threshold:
            violations.append(t)
    return Prop22Report(
        sums=sums,
        threshold=threshold,
        violations=tuple(violations),
        cube_range=J,
        conditioned=conditioned,
    )


# ---------------------------------------------------------------------------
# Poisson hole probabilities


def hole_probability_lower_bound(lambdas: Sequence[float]) -> float:
    """Lower bound 1 - exp(-sum_i exp(-lambda_i)) for the probability that at
    least one of n independent Poisson counts is zero."""
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam < 0):
        raise ValueError("Poisson means must be nonnegative")
    return 1.0 - math.exp(-float(np.sum(np.exp(-lam))))


def hole_probability_exact(lambdas: Sequence[float]) -> float:
    """Exact probability 1 - prod_i (1 - exp(-lambda_i))."""
    lam = np.asarray(lambdas, dtype=float)
    return 1.0 - float(np.prod(1.0 - np.exp(-lam)))


@dataclass(frozen=True)
class VoidReport:
    lambdas: Tuple[float, ...]
    bound: float
    exact: float
    empirical_any_empty: float
    empirical_stderr: float
    per_cube_empty: Tuple[float, ...]
    trials: int
    any_empty_flags: np.ndarray


def void_monte_carlo(lambdas: Sequence[float], trials: int, seed: int) -> VoidReport:
    """Empirical frequency of 'some count is zero' for independent Poisson
    counts, next to the lower bound and the exact product formula."""
    lam = np.asarray(lambdas, dtype=float)
    rng = master_rng(seed)
    counts = rng.poisson(lam[None, :], size=(trials, lam.shape[0]))
    empty = counts == 0
    flags = empty.any(axis=1)
    any_empty = float(np.mean(flags))
    stderr = math.sqrt(max(any_empty * (1 - any_empty), 0.0) / trials)
    return VoidReport(
        lambdas=tuple(float(v) for v in lam),
        bound=hole_probability_lower_bound(lam),
        exact=hole_probability_exact(lam),
        empirical_any_empty=any_empty,
        empirical_stderr=stderr,
        per_cube_empty=tuple(float(v) for v in empty.mean(axis=0)),
        trials=trials,
        any_empty_flags=flags,
    )


@dataclass(frozen=True)
class EmptyCubeAudit:
    """Summability table for the per-cube void bounds N^(-c0*alpha^d).

    Terms are summed over sup-norm shells of integer cube indices; the
    verdict is empirical (growth of partial sums) next to the analytic
    exponent test.  Monte Carlo columns are filled when trials > 0.
    """

    c0: float
    alpha: float
    d: int
    shells: np.ndarray
    shell_terms: np.ndarray
    partial_sums: np.ndarray
    last_increment: float
    summable_condition: bool
    verdict: str
    mc_shells: Tuple[int, ...]
    mc_empty_freq: Tuple[float, ...]
    mc_bound: Tuple[float, ...]
    mc_mean_bound_ok: bool


def _shell_count(m: int, d: int) -> int:
    return (2 * m + 1) ** d - (2 * m - 1) ** d


def prop24_empty_cube_audit(
    c0: float,
    alpha: float,
    d: int,
    N_range: int,
    trials: int = 0,
    seed: int = 0,
    mc_shells: Sequence[int] = (),
) -> EmptyCubeAudit:
    """Tabulate per-cube empty-probability bounds for the log-intensity
    Poisson process and diagnose the convergence of their sum.

    The per-cube bound at shell m is max(alpha*m, 1)^(-c0*alpha^d); the
    summability criterion c0*alpha^d >= d+1 makes the shell sums converge.
    With trials > 0, a d = 1 Monte Carlo on the thinned process checks the
    empirical per-cube void frequencies against the bounds.
    """
    if N_range < 4:
        raise ValueError("N_range must be at least 4")
    expo = c0 * alpha**d
    ms = np.arange(1, N_range + 1)
    per_cube = np.maximum(alpha * ms, 1.0) ** (-expo)
    terms = np.array([_shell_count(int(m), d) for m in ms], dtype=float) * per_cube
    partial = np.cumsum(terms)
    half = partial[N_range // 2 - 1]
    growth = (partial[-1] - half) / max(partial[-1], 1e-300)
    if growth < 5e-3:
        verdict = "converges"
    elif growth > 0.05:
        verdict = "diverges"
    else:
        verdict = "inconclusive"

    mc_freq: Tuple[float, ...] = ()
    mc_bound: Tuple[float, ...] = ()
    mean_ok = True
    shells_used: Tuple[int, ...] = ()
    if trials > 0:
        if d != 1:
            raise ValueError("the Monte Carlo audit is implemented for d = 1")
        shells_used = tuple(int(m) for m in (mc_shells or range(2, min(9, N_range))))
        m_hi = max(shells_used)
        region = np.array([[-alpha * (m_hi + 1), alpha * (m_hi + 1)]])
        lam_max = c0 * (1.0 + math.log(max(alpha * (m_hi + 1) * 1.0001, 1.0)))
        empties = np.zeros(len(shells_used))
        bounds = []
        for m in shells_used:
            lo = alpha * m
            mean = _log_intensity_mass(c0, lo, lo + alpha)
            bounds.append(math.exp(-mean))
            if mean < expo * math.log(max(alpha * m, 1.0)) - 1e-9:
                mean_ok = False
        for t in range(trials):
            X = poisson_inhomogeneous(region, log_intensity(c0), lam_max, int(stream_rng(seed, t).integers(2**63)))
            xs = X.points[:, 0]
            for i, m in enumerate(shells_used):
                lo = alpha * m
                if not np.any((xs >= lo) & (xs <= lo + alpha)):
                    empties[i] += 1.0
        mc_freq = tuple(float(v / trials) for v in empties)
        mc_bound = tuple(float(b) for b in bounds)

    return EmptyCubeAudit(
        c0=float(c0),
        alpha=float(alpha),
        d=int(d),
        shells=ms,
        shell_terms=terms,
        partial_sums=partial,
        last_increment=float(terms[-1]),
        summable_condition=bool(expo >= d + 1),
        verdict=verdict,
        mc_shells=shells_used,
        mc_empty_freq=mc_freq,
        mc_bound=mc_bound,
        mc_mean_bound_ok=mean_ok,
    )


def _log_intensity_mass(c0: float, lo: float, hi: float) -> float:
    """Integral of c0*(1 + log+ |x|) over [lo, hi] for 1 <= lo < hi."""
    if lo < 1.0:
        raise ValueError("closed form requires lo >= 1")
    return c0 * (hi * math.log(hi) - lo * math.log(lo))
