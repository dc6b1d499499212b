import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prolate.spectrum import calibrate_kappa
from prolate.theory import (
    bernstein_bound,
    chain_constants,
    covering_number_l2,
    covering_number_sup,
    delta_feasibility,
    deviation_bound,
    deviation_validity_threshold,
    fit_exponent_scale,
    geometric_tail_bound,
    min_samples,
    norm_comparison_constant,
    p_poly,
    sampling_probability_bound,
    theory_params,
    truncation_dimension,
)

SQRT2 = math.sqrt(2.0)


class TestNormComparisonConstant:
    def test_d1_closed_form(self):
        # sigma_0 = 2, so K_1 = 2*(3*pi)**(1/3)
        assert norm_comparison_constant(1) == pytest.approx(2 * (3 * math.pi) ** (1 / 3), rel=1e-12)

    def test_d2_closed_form(self):
        sigma1 = 2 * math.pi
        expected = 2 * (2 * 3 * 4 / sigma1) ** 0.25 * (math.pi * SQRT2) ** 0.5
        assert norm_comparison_constant(2) == pytest.approx(expected, rel=1e-12)
        assert norm_comparison_constant(2) == pytest.approx(5.894, abs=1e-3)

    def test_linear_growth(self):
        ratios = [norm_comparison_constant(d) / d for d in range(1, 9)]
        assert max(ratios) < 8.0


class TestCoveringNumbers:
    def test_monotone_in_eps(self):
        vals = [covering_number_l2(4.0, 0.2, eps, 1, 0.7) for eps in (0.01, 0.05, 0.1, 0.5, 0.9)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_l2_re_evaluation_oracle(self):
        R, delta, eps, d, kappa = 4.0, 0.2, 0.1, 1, 1.0
        expected = 2 ** (d + 1) * (R + kappa * math.log(2 * math.sqrt(delta) / eps)) ** d * math.log(
            4 * SQRT2 / eps
        )
        assert covering_number_l2(R, delta, eps, d, kappa) == pytest.approx(expected, rel=1e-12)

    def test_sup_re_evaluation_oracle(self):
        R, eps, d, kappa = 4.0, 0.1, 2, 0.8
        K = norm_comparison_constant(d)
        expected = 2 ** (d + 1) * (
            R + kappa * (d / 2 + 1) * math.log(2 * K / eps)
        ) ** d * math.log(4 * K / eps)
        assert covering_number_sup(R, eps, d, kappa) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("d", [1, 2])
    def test_p_poly_degree(self, d):
        # log2 of the term ratio climbs toward the polynomial degree d+1
        r1 = math.log2(p_poly(20, 4.0, d, 0.7) / p_poly(10, 4.0, d, 0.7))
        r2 = math.log2(p_poly(40, 4.0, d, 0.7) / p_poly(20, 4.0, d, 0.7))
        assert abs(r2 - (d + 1)) < abs(r1 - (d + 1)) + 1e-12
        assert abs(r2 - (d + 1)) < 0.75
        r3 = math.log2(p_poly(640, 4.0, d, 0.7) / p_poly(320, 4.0, d, 0.7))
        assert abs(r3 - (d + 1)) < 0.15

    def test_invalid_eps(self):
        with pytest.raises(ValueError):
            covering_number_l2(4.0, 0.2, 1.5, 1, 1.0)


class TestTruncation:
    def test_from_spectrum(self, specd4_1):
        res = truncation_dimension(4.0, 1, 0.2, 0.1, specd4_1)
        lam = specd4_1.eigenvalues
        threshold = 0.1**2 / (4 * 0.2)
        assert lam[res.D] < threshold <= lam[res.D - 1]
        assert not res.degenerate
        assert res.D <= res.closed_form_bound

    def test_degenerate_threshold(self, specd4_1):
        res = truncation_dimension(4.0, 1, 0.9, 1.9, specd4_1)
        assert res.degenerate and res.D == 1

    def test_monotone_in_eps(self, specd4_1):
        ds = [truncation_dimension(4.0, 1, 0.2, eps, specd4_1).D for eps in (0.02, 0.1, 0.5)]
        assert all(a >= b for a, b in zip(ds, ds[1:]))


class TestChainConstants:
    def test_c1_exact(self):
        cc = chain_constants(4.0, 1, 0.7)
        assert cc.c1 == 1.0 / 36.0
        assert cc.ell_star == 6

    def test_b_value(self):
        cc = chain_constants(4.0, 1, 0.7)
        assert cc.B == pytest.approx(SQRT2 / 36.0, rel=1e-15)
        assert cc.B == pytest.approx(0.0393, abs=5e-5)

    def test_41_margin_with_tail_certificate(self):
        ells = np.arange(2, 65)
        vals = ells**2 / 2.0**ells
        assert np.all(36.0 * vals < 41.0)
        assert vals.max() == pytest.approx(9.0 / 8.0, rel=1e-15)
        assert ells[int(np.argmax(vals))] == 3
        # decreasing beyond the maximum: (1 + 1/ell)^2 < 2 from ell = 3 on
        assert (1 + 1 / 3.0) ** 2 < 2.0
        assert np.all(np.diff(vals[1:]) < 0)

    def test_c2_search_matches_wide_scan(self):
        for d in (1, 2):
            cc = chain_constants(4.0, d, 0.7)
            wide = max(
                2.0 * p_poly(l, 4.0, d, 0.7) / 2.0 ** (l / 2.0) for l in range(2, 500)
            )
            assert cc.c2 == pytest.approx(wide, rel=1e-12)

    def test_log_a_dominates_both_terms(self):
        cc = chain_constants(4.0, 1, 0.7)
        assert cc.log_A >= covering_number_sup(4.0, 0.5, 1, 0.7) - 1e-9
        assert cc.log_A >= SQRT2 * cc.c2 - 1e-9

    def test_exponent_scale_bounded(self):
        C = fit_exponent_scale(1, 0.7)
        for R in (4.0, 8.0, 16.0):
            log_A = chain_constants(R, 1, 0.7).log_A
            assert log_A <= C * R + 1e-9
            assert log_A / R > 0.0


class TestProbabilityBounds:
    def test_deviation_vacuous_at_zero(self):
        res = deviation_bound(0.0, 100, 4.0, 1, 50.0, SQRT2 / 36)
        assert res.probability == 1.0 and res.vacuous

    def test_deviation_decreases_in_lambda(self):
        vals = [
            deviation_bound(lam, 1000, 4.0, 1, 5.0, SQRT2 / 36).log_value
            for lam in (10.0, 100.0, 1000.0)
        ]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_min_samples_direct_evaluation(self):
        B = SQRT2 / 36.0
        expected = math.ceil(2.0 * 41.5 / (B * 0.25) * (math.log(200.0) + 10.0 * 2.0))
        assert min_samples(2.0, 1, 0.5, 0.01, B, 10.0) == expected
        assert expected == pytest.approx(2.14e5, rel=5e-3)

    def test_min_samples_quadratic_scaling(self):
        B = SQRT2 / 36.0
        ratio = min_samples(4.0, 1, 0.5, 0.01, B, 10.0) / min_samples(2.0, 1, 0.5, 0.01, B, 10.0)
        assert abs(ratio - 4.0) <= 0.15 * 4.0

    def test_sampling_bound_monotone_in_r(self):
        vals = [
            sampling_probability_bound(r, 2.0, 1, 0.5, 3.0, SQRT2 / 36).probability
            for r in (10, 10_000, 100_000)
        ]
        assert vals[0] == 0.0  # vacuous at tiny r
        assert vals[1] < vals[2] <= 1.0

    def test_validity_threshold(self):
        c4 = 100.0
        lam = deviation_validity_threshold(1000, 4.0, 1, c4)
        assert lam == pytest.approx(c4 + math.sqrt(41.0 * c4 * 1000 / 4.0), rel=1e-12)
        # at the threshold the ratio lambda^2/(41 r R^-d + lambda) reaches c4
        psi = lam**2 / (41.0 * 1000 / 4.0 + lam)
        assert psi >= c4 - 1e-9


class TestBernstein:
    def test_vacuous_at_zero(self):
        res = bernstein_bound(0.0, 10, 1.0, 1.0)
        assert res.value == 2.0 and res.vacuous

    def test_direct_evaluation(self):
        res = bernstein_bound(1.0, 1, 1.0, 1.0)
        assert res.value == pytest.approx(2 * math.exp(-0.375), rel=1e-12)
        assert res.value == pytest.approx(1.3746, abs=5e-5)
        assert res.vacuous

    def test_monte_carlo_never_exceeds(self):
        rng = np.random.default_rng(42)
        r, trials = 50, 10_000
        sums = rng.uniform(-1.0, 1.0, size=(trials, r)).sum(axis=1)
        sigma2, M = 1.0 / 3.0, 1.0
        for lam in (5.0, 8.0, 12.0):
            emp = float(np.mean(np.abs(sums) >= lam))
            bound = min(1.0, bernstein_bound(lam, r, sigma2, M).value)
            stderr = math.sqrt(bound * (1 - bound) / trials)
            assert emp <= bound + 3 * stderr

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            bernstein_bound(1.0, 10, 0.0, 1.0)
        with pytest.raises(ValueError):
            bernstein_bound(-1.0, 10, 1.0, 1.0)


class TestGeometricTail:
    def test_value(self):
        expected = math.exp(-SQRT2) / (SQRT2 * math.log(SQRT2))
        assert geometric_tail_bound(1.0, SQRT2) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.4960, abs=5e-5)

    def test_partial_sums_never_exceed(self):
        total = sum(math.exp(-SQRT2**l * 1.0) for l in range(2, 51))
        assert total <= geometric_tail_bound(1.0, SQRT2)

    @settings(max_examples=50, deadline=None)
    @given(
        p=st.floats(min_value=0.01, max_value=50.0),
        a=st.floats(min_value=1.05, max_value=4.0),
    )
    def test_partial_sums_never_exceed_property(self, p, a):
        total = sum(math.exp(-(a**l) * p) for l in range(2, 200))
        assert total <= geometric_tail_bound(p, a) * (1 + 1e-12)

    def test_vanishes_for_large_p(self):
        assert geometric_tail_bound(100.0, SQRT2) < 1e-40

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            geometric_tail_bound(1.0, 1.0)
        with pytest.raises(ValueError):
            geometric_tail_bound(0.0, 2.0)


class TestOutputsAlwaysFinite:
    def test_probability_bounds_clipped_and_flagged(self):
        for lam in (0.0, 1e-6, 1.0, 1e3, 1e9):
            for r in (0, 1, 10**6):
                res = deviation_bound(lam, r, 4.0, 1, 200.0, SQRT2 / 36)
                assert 0.0 <= res.probability <= 1.0
                assert math.isfinite(res.log_value) or res.log_value == -math.inf
                assert res.vacuous == (res.log_value >= 0.0)
        for mu in (1e-6, 0.5, 0.99):
            for r in (1, 10**7):
                res = sampling_probability_bound(r, 4.0, 1, mu, 200.0, SQRT2 / 36)
                assert 0.0 <= res.probability <= 1.0
        for lam in (0.0, 1.0, 1e6):
            b = bernstein_bound(lam, 100, 0.25, 1.0)
            assert 0.0 <= b.value <= 2.0 and math.isfinite(b.value)


class TestDeltaFeasibility:
    def test_value(self):
        assert delta_feasibility(4.0, 1) == pytest.approx(6.198e-5, rel=1e-3)

    def test_linear_in_dimension(self):
        assert delta_feasibility(4.0, 2) == pytest.approx(2 * delta_feasibility(4.0, 1), rel=1e-15)

    def test_against_spectrum(self, spec4, spec8):
        for spec in (spec4, spec8):
            gap = 1.0 - spec.eigenvalues[0]
            assert gap >= delta_feasibility(spec.bandwidth_R, 1) / 2.0


class TestTheoryParams:
    def test_bundle_values(self, spec4):
        kappa = calibrate_kappa(spec4)
        params = theory_params(4.0, 1, kappa)
        assert params.c1 == 1.0 / 36.0
        assert params.B == pytest.approx(SQRT2 / 36.0)
        assert params.K_d == pytest.approx(norm_comparison_constant(1))
        assert params.log_A <= params.C * 4.0 + 1e-9
        assert params.c4 == pytest.approx((params.c2 + 2**1.5 / math.log(2.0)) / params.c1)
        assert all(
            v > 0 for v in (params.kappa, params.K_d, params.c1, params.c2, params.B, params.C)
        )
