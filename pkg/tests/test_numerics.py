import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepfam.errors import DomainError, NoRootError
from sepfam.numerics import (
    RootBracket,
    chi2_cdf,
    chi2_quantile,
    digamma,
    log_gamma,
    regularized_gamma_p,
    sample_gamma,
    sample_lognormal,
    sample_weibull,
    solve_scalar_root,
    std_normal_cdf,
)


class TestLogGamma:
    def test_known_values(self):
        assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
        assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-13)
        assert log_gamma(8.0) == pytest.approx(math.log(5040.0), rel=1e-13)

    @pytest.mark.parametrize("x", [1e-6, 1e-3, 0.5, 1.0, 3.7, 100.0, 1e6])
    def test_recurrence(self, x):
        assert log_gamma(x + 1.0) == pytest.approx(log_gamma(x) + math.log(x), rel=1e-12, abs=1e-12)

    def test_accuracy_against_scipy(self):
        gammaln = pytest.importorskip("scipy.special").gammaln
        xs = np.geomspace(1e-6, 1e6, 400)
        ours = np.array([log_gamma(x) for x in xs])
        ref = gammaln(xs)
        mask = np.abs(ref) > 1e-8
        assert np.max(np.abs(ours[mask] - ref[mask]) / np.abs(ref[mask])) < 1e-12

    @pytest.mark.parametrize("x", [0.0, -1.0, math.nan, math.inf])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            log_gamma(x)


class TestDigamma:
    def test_against_scipy(self):
        sp = pytest.importorskip("scipy.special")
        xs = np.geomspace(1e-3, 1e5, 200)
        ours = np.array([digamma(x) for x in xs])
        assert np.max(np.abs(ours - sp.psi(xs))) < 1e-11

    def test_recurrence(self):
        for x in (0.2, 1.0, 4.5):
            assert digamma(x + 1.0) == pytest.approx(digamma(x) + 1.0 / x, abs=1e-12)


class TestNormalCdf:
    def test_center_and_tail(self):
        assert std_normal_cdf(0.0) == 0.5
        # 5% two-sided rejection boundary.
        assert std_normal_cdf(1.96) == pytest.approx(0.975, abs=2.5e-4)
        # reported deviate -3.048 has two-tailed p-value 0.002
        p = 2.0 * std_normal_cdf(-3.048)
        assert p == pytest.approx(0.002, abs=5e-4)

    @given(st.floats(-30, 30))
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, z):
        assert std_normal_cdf(z) + std_normal_cdf(-z) == pytest.approx(1.0, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            std_normal_cdf(math.nan)


class TestChiSquare:
    def test_cdf_at_zero(self):
        for df in (1, 2, 3, 5.5):
            assert chi2_cdf(0.0, df) == 0.0

    def test_exponential_median(self):
        # chi2 with 2 dof is Exp(rate 1/2), median 2 ln 2
        assert chi2_quantile(0.5, 2) == pytest.approx(2.0 * math.log(2.0), rel=1e-10)

    def test_threshold_composition(self):
        # evidence threshold at 5%: full dim 3, constrained dim 2
        c = chi2_cdf(chi2_quantile(0.95, 1), 3)
        assert c == pytest.approx(0.72, abs=0.005)

    @pytest.mark.parametrize("df", [1.0, 2.0, 3.0, 5.0])
    def test_roundtrip(self, df):
        for x in np.geomspace(0.01, 30.0, 40):
            q = chi2_cdf(x, df)
            if q >= 1.0 - 1e-14:
                continue
            assert chi2_quantile(q, df) == pytest.approx(x, rel=1e-8)

    def test_against_scipy(self):
        stats = pytest.importorskip("scipy.stats")
        for df in (0.5, 1.0, 2.0, 4.0, 11.0):
            for x in (0.05, 0.8, 3.1, 12.0, 40.0):
                assert chi2_cdf(x, df) == pytest.approx(stats.chi2.cdf(x, df), abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            chi2_cdf(-1.0, 2)
        with pytest.raises(DomainError):
            chi2_cdf(1.0, 0.0)
        with pytest.raises(DomainError):
            chi2_quantile(0.0, 2)
        with pytest.raises(DomainError):
            chi2_quantile(1.0, 2)

    def test_regularized_gamma_domain(self):
        with pytest.raises(DomainError):
            regularized_gamma_p(0.0, 1.0)
        with pytest.raises(DomainError):
            regularized_gamma_p(1.0, -1.0)


class TestRootSolve:
    def test_quadratic(self):
        root = solve_scalar_root(lambda x: x * x - 4.0, RootBracket(0.0, 10.0), tol=1e-12)
        assert root == pytest.approx(2.0, abs=1e-10)

    def test_stays_in_bracket(self):
        calls = []

        def f(x):
            calls.append(x)
            return math.tanh(x - 1.3)

        root = solve_scalar_root(f, RootBracket(-5.0, 5.0), tol=1e-13)
        assert root == pytest.approx(1.3, abs=1e-10)
        assert all(-5.0 <= x <= 5.0 for x in calls)

    def test_with_derivative(self):
        root = solve_scalar_root(
            lambda x: math.exp(x) - 3.0,
            RootBracket(0.0, 4.0),
            tol=1e-13,
            df=math.exp,
        )
        assert root == pytest.approx(math.log(3.0), rel=1e-12)

    def test_no_root(self):
        with pytest.raises(NoRootError):
            solve_scalar_root(lambda x: 1.0 + x * x, RootBracket(-1.0, 1.0), tol=1e-12)

    def test_bad_bracket(self):
        with pytest.raises(DomainError):
            RootBracket(2.0, 1.0)


class TestSamplers:
    def test_lognormal_moments(self):
        rng = np.random.default_rng(1234)
        draws = sample_lognormal(0.0, 1.0, rng, size=1_000_000)
        assert draws.mean() == pytest.approx(math.exp(0.5), rel=0.01)
        assert draws.var() == pytest.approx((math.e - 1.0) * math.e, rel=0.01)

    def test_weibull_moments(self):
        rng = np.random.default_rng(1234)
        draws = sample_weibull(1.0, 1.0, rng, size=1_000_000)
        assert draws.mean() == pytest.approx(1.0, rel=0.01)
        assert draws.var() == pytest.approx(1.0, rel=0.01)

    def test_gamma_moments(self):
        rng = np.random.default_rng(1234)
        draws = sample_gamma(2.5, 8.0, rng, size=1_000_000)
        assert draws.mean() == pytest.approx(20.0, rel=0.01)
        assert draws.var() == pytest.approx(50.0, rel=0.01)

    def test_seeded_determinism(self):
        a = sample_gamma(2.0, 3.0, np.random.default_rng(7), size=10)
        b = sample_gamma(2.0, 3.0, np.random.default_rng(7), size=10)
        np.testing.assert_array_equal(a, b)

    def test_invalid_params(self):
        rng = np.random.default_rng(0)
        with pytest.raises(DomainError):
            sample_lognormal(0.0, -1.0, rng)
        with pytest.raises(DomainError):
            sample_gamma(0.0, 1.0, rng)
        with pytest.raises(DomainError):
            sample_weibull(1.0, math.inf, rng)
