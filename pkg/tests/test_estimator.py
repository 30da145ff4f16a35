import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ar1fit.core import AcvfConfig, ar1_true_acvf, arma_acvf_sequence
from ar1fit.errors import DomainError, InconsistencyError, UninformativeLagError
from ar1fit.estimator import (
    EstimatorConfig,
    NoiseSpec,
    choose_root,
    estimate,
    g_function,
    phi_degenerate,
    phi_quadratic,
    phi_ratio,
    phi_zero_gamma,
    quadratic_root_values,
    quadratic_roots,
    var_degenerate,
    var_quadratic,
    var_ratio,
    var_zero_gamma,
)
from ar1fit.simgen import gen_ar1, gen_arma, make_rng

from oracles import delta_variance, fd_gradient, random_spd, root_minus, root_plus


def ar1_triple(phi, N):
    return tuple(ar1_true_acvf(phi, 1.0, n) for n in (N + 1, N, N - 1))


class TestQuadraticRoots:
    def test_ar1_lag2_roots(self):
        plus, minus, g = quadratic_roots(*ar1_triple(0.5, 2), 0.0)
        assert plus == pytest.approx(2.0, rel=1e-14)
        assert minus == pytest.approx(0.5, rel=1e-14)
        assert g > 0

    def test_negative_discriminant_collapses(self):
        plus, minus, g = quadratic_roots(0.1, 1.0, 0.1, 0.0)
        assert g < 0
        assert plus == minus == pytest.approx(0.1)

    def test_minus_root_without_cancellation(self):
        # sqrt(g) ~ s here; the naive formula loses about half the digits
        a, b, c, r = 0.6, 1e-7, 0.4, 0.0
        _, minus, _ = quadratic_roots(a, b, c, r)
        ref = root_minus(mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(c), mpmath.mpf(r))
        assert minus == pytest.approx(float(ref), rel=1e-14)
        vec = quadratic_root_values(np.array([a, -a]), np.array([b, b]), np.array([c, -c]), r, "plus")
        ref_neg = root_plus(mpmath.mpf(-a), mpmath.mpf(b), mpmath.mpf(-c), mpmath.mpf(r))
        assert vec[1] == pytest.approx(float(ref_neg), rel=1e-14)

    def test_double_root_snaps(self):
        # exact double root perturbed only by rounding
        plus, minus, g = quadratic_roots(0.1 + 0.2, 0.5, 0.0, 0.5 - 0.3 ** 2 / 2)
        assert g == 0.0 and plus == minus

    def test_gamma_zero_rejected(self):
        with pytest.raises(DomainError):
            quadratic_roots(0.3, 0.0, 0.4, 0.1)

    def test_vectorised_matches_scalar(self):
        rng = np.random.default_rng(5)
        a, b, c = rng.normal(size=(3, 50))
        r = 0.2
        for root in ("plus", "minus"):
            vec = quadratic_root_values(a, b, c, r, root)
            for i in range(50):
                p, m, _ = quadratic_roots(a[i], b[i], c[i], r)
                assert vec[i] == pytest.approx(p if root == "plus" else m, rel=1e-13)
        assert quadratic_root_values(0.3, 0.0, 0.2, 0.0) == 0.0
        out = phi_quadratic(a, b, c, r)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_g_function_gradient(self):
        gf = g_function((0.4, 1.0, 0.7), 0.2)
        assert gf.value == pytest.approx(1.21 - 4 * 0.8)
        assert gf.sqrt_gradient is None
        gf = g_function((1.0, 1.0, 1.0), 1.0)
        assert gf.value == pytest.approx(4.0)
        num = fd_gradient(lambda a, b, c: mpmath.sqrt((a + c) ** 2 - 4 * b * (b - 1)), (1.0, 1.0, 1.0))
        assert np.allclose(gf.sqrt_gradient, num, rtol=1e-12)


class TestChooseRoot:
    def test_nonpositive_a_picks_minus_for_positive_gamma(self):
        assert choose_root((2.0, 0.5), 1.0, 0.0)[:2] == (0.5, "quadratic-minus")
        assert choose_root((2.0, 0.5), 1.0, -0.3)[:2] == (0.5, "quadratic-minus")

    def test_mirrored_for_negative_gamma(self):
        assert choose_root((0.5, 2.0), -1.0, 0.0)[:2] == (0.5, "quadratic-plus")
        assert choose_root((0.5, 2.0), -1.0, 1.5)[:2] == (2.0, "quadratic-minus")

    def test_a_at_least_one(self):
        assert choose_root((0.7, 0.2), 1.0, 1.0)[:2] == (0.7, "quadratic-plus")

    def test_ambiguous_without_second_lag(self):
        phi, formula, amb = choose_root((0.8, 0.3), 1.0, 0.5)
        assert amb and phi == 0.3

    def test_second_lag_disambiguates(self):
        phi, formula, amb = choose_root((0.8, 0.3), 1.0, 0.5, second=(2.5, 0.8, 0.0), tol=1e-6)
        assert (phi, formula, amb) == (0.8, "quadratic-plus", False)

    def test_second_lag_inconsistent(self):
        with pytest.raises(InconsistencyError):
            choose_root((0.8, 0.3), 1.0, 0.5, second=(5.0, 0.6, 0.0), tol=1e-6)

    def test_non_finite_a(self):
        with pytest.raises(DomainError):
            choose_root((0.8, 0.3), 1.0, float("inf"))


class TestClosedForms:
    def test_zero_gamma_example(self):
        # ARMA(1,1) with theta = -phi: gamma(1) = 0 and r(1) = theta
        phi = 0.6
        g = arma_acvf_sequence(phi, [-phi], 1.0, 3)
        est = phi_zero_gamma(g[2], g[0], -phi)
        assert est.phi == pytest.approx(0.6, rel=1e-12)
        assert not est.clamped

    def test_clamping(self):
        assert phi_zero_gamma(0.1, 0.1, 1.0).phi == 0.0
        assert phi_zero_gamma(0.1, 0.1, -1.0).phi == 1.0
        assert phi_zero_gamma(0.1, 0.1, -1.0).clamped
        assert phi_ratio(2.0, 1.0).raw == 2.0 and phi_ratio(2.0, 1.0).phi == 1.0

    def test_indicator_conventions(self):
        assert phi_zero_gamma(0.5, -0.5, 1.0).phi == 0.0
        assert phi_degenerate(0.5, 0.0, 0.5).phi == 0.0
        assert phi_ratio(0.5, 0.0).phi == 0.0

    def test_degenerate_and_ratio_on_ar1(self):
        g = [ar1_true_acvf(0.4, 1.0, n) for n in range(4)]
        assert phi_ratio(g[2], g[1]).phi == pytest.approx(0.4, rel=1e-14)
        # degenerate value is (phi + 1/phi)/2 clamped
        assert phi_degenerate(g[2], g[1], g[0]).raw == pytest.approx((0.4 + 2.5) / 2, rel=1e-14)


def _admissible(draw_floats):
    a, b, c, r = draw_floats
    s = a + c
    return b != 0 and s * s - 4 * b * (b - r) > 0.05 * (s * s + b * b)


class TestDeltaVariances:
    """Each closed-form variance against a high-precision finite-difference oracle."""

    def test_quadratic_both_roots(self):
        rng = np.random.default_rng(11)
        done = 0
        while done < 40:
            a, b, c = rng.uniform(-1.5, 1.5, 3)
            r = rng.uniform(-1, 1)
            if not _admissible((a, b, c, r)) or abs(b) < 0.1:
                continue
            S = random_spd(rng, 3)
            for root, f in (("plus", root_plus), ("minus", root_minus)):
                ref = delta_variance(lambda x, y, z: f(x, y, z, mpmath.mpf(r)), (a, b, c), S)
                assert var_quadratic((a, b, c), r, S, root) == pytest.approx(ref, rel=1e-9)
            done += 1

    def test_zero_gamma(self):
        rng = np.random.default_rng(12)
        for _ in range(40):
            a, c = rng.uniform(0.2, 1.5, 2)
            r = rng.uniform(-1, 1)
            S = random_spd(rng, 2)
            ref = delta_variance(lambda x, z: -mpmath.mpf(r) / (x + z), (a, c), S)
            assert var_zero_gamma(a, c, r, S) == pytest.approx(ref, rel=1e-9)

    def test_degenerate(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            a, c = rng.uniform(-1.5, 1.5, 2)
            b = rng.choice([-1, 1]) * rng.uniform(0.1, 1.5)
            S = random_spd(rng, 3)
            ref = delta_variance(lambda x, y, z: (x + z) / (2 * y), (a, b, c), S)
            assert var_degenerate((a, b, c), S) == pytest.approx(ref, rel=1e-9)

    def test_ratio(self):
        rng = np.random.default_rng(14)
        for _ in range(40):
            num = rng.uniform(-1.5, 1.5)
            den = rng.choice([-1, 1]) * rng.uniform(0.1, 1.5)
            S = random_spd(rng, 2)
            ref = delta_variance(lambda x, y: x / y, (num, den), S)
            assert var_ratio((num, den), S) == pytest.approx(ref, rel=1e-9)

    def test_quadratic_requires_positive_g(self):
        with pytest.raises(DomainError):
            var_quadratic((0.1, 1.0, 0.1), 0.0, np.eye(3))


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(phi=st.floats(0.01, 0.99), N=st.integers(1, 10), sigma2=st.floats(0.1, 10))
    def test_ar1_exact_recovery(self, phi, N, sigma2):
        trip = tuple(ar1_true_acvf(phi, sigma2, n) for n in (N + 1, N, N - 1))
        plus, minus, g = quadratic_roots(*trip, 0.0)
        assert g >= -1e-10
        chosen, _, amb = choose_root((plus, minus), trip[1], 0.0)
        assert not amb
        assert chosen == pytest.approx(phi, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(-2, 2), b=st.floats(-2, 2), c=st.floats(-2, 2), r=st.floats(-2, 2))
    def test_roots_solve_quadratic(self, a, b, c, r):
        if abs(b) < 1e-3 or (a + c) ** 2 - 4 * b * (b - r) <= 0:
            return
        for x in quadratic_roots(a, b, c, r)[:2]:
            resid = x * x * b - x * (a + c) + b - r
            assert abs(resid) <= 1e-9 * max(1.0, x * x) * 8

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=50))
    def test_quadratic_estimate_in_unit_interval(self, vals):
        v = np.asarray(vals[: len(vals) // 2 * 2]).reshape(-1, 2)
        out = phi_quadratic(v[:, 0], v[:, 1], v[:, 0] * 0.5, 0.1)
        assert np.all((out >= 0) & (out <= 1))


class TestEstimatePipeline:
    def test_ar1_lag3(self):
        x = gen_ar1(0.5, 1.0, 20000, make_rng(21))
        res = estimate(x, 2, 0.0)
        assert res.formula == "quadratic-minus"
        assert abs(res.phi - 0.5) < 0.05
        assert res.ci[0] <= res.phi <= res.ci[1]
        assert [t.null for t in res.tests] == ["gamma-zero", "g-zero"]
        assert res.candidates[1] == pytest.approx(res.raw)

    def test_zero_gamma_branch(self):
        x = gen_arma(0.6, [-0.6], 1.0, 20000, make_rng(22))
        res = estimate(x, 1, -0.6)
        assert res.formula == "zero-gamma"
        assert abs(res.phi - 0.6) < 0.05
        assert math.isfinite(res.variance)

    def test_uninformative_lag(self):
        x = make_rng(23).standard_normal(5000)
        with pytest.raises(UninformativeLagError):
            estimate(x, 2, 0.0)

    def test_ambiguity_flag_and_second_lag(self):
        phi, th = 0.5, [0.8, 0.3]
        x = gen_arma(phi, th, 1.0, 50000, make_rng(24))
        r1 = 1.04
        single = estimate(x, 1, {1: r1})
        g = arma_acvf_sequence(phi, th, 1.0, 2)
        if 0 < r1 / g[1] < 1:
            assert single.ambiguous
        both = estimate(x, 1, {1: r1, 3: 0.0})
        assert not both.ambiguous
        assert abs(both.phi - phi) < 0.05

    def test_missing_lag_in_noise(self):
        with pytest.raises(DomainError):
            estimate(np.random.default_rng(0).normal(size=100), 2, {3: 0.0})

    def test_config_passthrough(self):
        x = gen_ar1(0.5, 1.0, 3000, make_rng(25))
        cfg = EstimatorConfig(acvf=AcvfConfig(denominator="T-n-1"), level=0.9)
        res = estimate(x, 1, NoiseSpec({1: 0.0}), cfg)
        assert res.level == 0.9
        wide = estimate(x, 1, 0.0, EstimatorConfig(level=0.99))
        assert wide.ci[1] - wide.ci[0] > res.ci[1] - res.ci[0]


class TestNoiseSpec:
    def test_validation(self):
        with pytest.raises(DomainError):
            NoiseSpec({})
        with pytest.raises(DomainError):
            NoiseSpec({-1: 0.0})
        with pytest.raises(DomainError):
            NoiseSpec({1: float("nan")})

    def test_other_lags(self):
        assert NoiseSpec({0: 1.0, 1: 0.0, 4: 0.0}).other_lags(1) == [4]


class TestWorkedValues:
    def test_minus_root_vanishes_when_r_equals_gamma(self):
        _, minus, g = quadratic_roots(0.4, 0.7, 0.3, 0.7)
        assert g == pytest.approx(0.49)
        assert minus == 0.0

    def test_a_above_one_picks_plus(self):
        assert choose_root((0.9, 0.1), 1.0, 1.5)[1] == "quadratic-plus"

    def test_ar1_two_lags_need_no_disambiguation(self):
        for N in (2, 3):
            plus, minus, _ = quadratic_roots(*ar1_triple(0.5, N), 0.0)
            phi, formula, amb = choose_root((plus, minus), ar1_true_acvf(0.5, 1.0, N), 0.0)
            assert phi == pytest.approx(0.5, abs=1e-14) and not amb

    def test_degenerate_values(self):
        assert phi_degenerate(0.3, 0.5, 0.3).phi == pytest.approx(0.6)
        est = phi_degenerate(0.6, 0.5, 0.6)
        assert est.raw == pytest.approx(1.2) and est.phi == 1.0 and est.clamped

    def test_zero_gamma_values(self):
        est = phi_zero_gamma(0.5, -0.5, 1.0)
        assert est.phi == 0.0 and not est.clamped
        est = phi_zero_gamma(0.4, 0.6, -2.0)
        assert est.raw == 2.0 and est.phi == 1.0 and est.clamped

    def test_ratio_values(self):
        g = [ar1_true_acvf(0.7, 1.0, n) for n in range(4)]
        assert phi_ratio(g[3], g[2]).phi == pytest.approx(0.7, rel=1e-14)
        g = arma_acvf_sequence(0.5, [0.8, 0.3], 1.0, 5)
        assert phi_ratio(g[4], g[3]).phi == pytest.approx(0.5, rel=1e-12)

    def test_variance_values(self):
        assert var_zero_gamma(0.5, 0.5, 1.0, np.eye(2)) == pytest.approx(2.0)
        assert var_zero_gamma(0.5, 0.5, 1.0, np.zeros((2, 2))) == 0.0
        assert var_quadratic(ar1_triple(0.5, 2), 0.0, np.zeros((3, 3))) == 0.0
        assert var_degenerate((0.1, 1.0, 0.2), np.zeros((3, 3))) == 0.0
        assert var_ratio((0.0, 0.5), np.diag([0.3, 0.7])) == pytest.approx(0.3 / 0.25)
        with pytest.raises(DomainError):
            var_zero_gamma(0.5, -0.5, 1.0, np.eye(2))
        with pytest.raises(DomainError):
            var_ratio((0.5, 0.0), np.eye(2))

    def test_ar1_lag2_variance_against_oracle(self):
        trip = ar1_triple(0.5, 2)
        ref = delta_variance(lambda a, b, c: root_minus(a, b, c, 0), trip, np.eye(3))
        assert var_quadratic(trip, 0.0, np.eye(3), "minus") == pytest.approx(ref, rel=1e-9)

    def test_scaling_invariance(self):
        rng = np.random.default_rng(8)
        trip, r, S, c = (0.9, 0.5, 0.7), 0.2, random_spd(rng, 3), 3.7
        scaled = tuple(c * v for v in trip)
        for root in ("plus", "minus"):
            assert var_quadratic(scaled, c * r, c * c * S, root) == pytest.approx(
                var_quadratic(trip, r, S, root), rel=1e-12)
        assert var_degenerate(scaled, c * c * S) == pytest.approx(var_degenerate(trip, S), rel=1e-12)
        S2 = S[:2, :2]
        assert var_zero_gamma(c * 0.5, c * 0.7, c * r, c * c * S2) == pytest.approx(
            var_zero_gamma(0.5, 0.7, r, S2), rel=1e-12)
        assert var_ratio((c * 0.5, c * 0.9), c * c * S2) == pytest.approx(var_ratio((0.5, 0.9), S2), rel=1e-12)

    def test_ar1_long_series_lag3(self):
        # single-path sd is ~0.018 here, so average a few paths
        phis = [estimate(gen_ar1(0.5, 1.0, 50000, make_rng(26 + k)), 3, 0.0).phi for k in range(10)]
        assert abs(np.mean(phis) - 0.5) < 0.02

    def test_zero_series_uninformative(self):
        with pytest.raises(UninformativeLagError):
            estimate(np.zeros(100), 1, 0.0)
