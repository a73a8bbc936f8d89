import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from parkfn.exact import pi1_cdf, pi1_mean, pi1_pmf
from parkfn.limits import (
    borel_cdf,
    borel_pmf,
    borel_pmf_direct,
    continuous_law,
    corner_upper_q,
    dh_corner,
    lambda_c,
    law_exponential_cdf,
    law_Fc,
    law_fc,
    law_geometric_pmf,
    law_q1_cdf,
    law_q1_density,
    law_Ysum,
    law_Zsum,
)
from parkfn.pmf import tv_distance

GRID = np.linspace(0, 1, 1001)


class TestContinuous:
    def test_q1_examples(self):
        assert law_q1_cdf(1.0) == 1.0 and law_q1_cdf(0.0) == 0.0
        assert law_q1_cdf(1 / math.e) == pytest.approx(2 / math.e)
        assert law_q1_density(0.5) == pytest.approx(math.log(2))
        with pytest.raises(ValueError):
            law_q1_cdf(1.5)

    def test_q1_matches_finite_n(self):
        n = 100_000
        for x in np.arange(0.1, 1.0, 0.1):
            assert abs(pi1_cdf(n, 1.0, math.floor(x * n)) - law_q1_cdf(x)) < 0.01

    def test_fc_examples(self):
        for c in (-3.0, 0.5, 4.0):
            assert law_Fc(1.0, c) == 1.0 and law_Fc(0.0, c) == 0.0
            assert law_fc(1.0, c) == 0.0
        assert law_Fc(0.5, 1e-4) == pytest.approx(law_q1_cdf(0.5), abs=1e-4)
        assert law_Fc(0.5, -1e-4) == pytest.approx(law_q1_cdf(0.5), abs=1e-4)
        assert law_Fc(0.3, 0.0) == law_q1_cdf(0.3)
        val, _ = quad(lambda x: law_fc(x, 2.0), 0, 0.5, limit=200)
        assert abs(law_Fc(0.5, 2.0) - val) < 1e-8

    @pytest.mark.parametrize("c", [-3.0, -1.0, 1.0, 3.0])
    def test_density_normalised_and_decreasing(self, c):
        val, _ = quad(lambda x: law_fc(x, c), 0, 1, limit=200)
        assert abs(val - 1) < 1e-8
        d = np.array([law_fc(x, c) for x in GRID[1:]])
        assert np.all(d >= 0) and np.all(np.diff(d) < 0)

    @given(st.floats(-6, 6).filter(lambda c: abs(c) > 1e-3), st.floats(0.01, 0.99))
    def test_cdf_is_integral_of_density(self, c, x):
        val, _ = quad(lambda y: law_fc(y, c), 0, x, limit=200)
        assert law_Fc(x, c) == pytest.approx(val, abs=1e-8)

    def test_fc_matches_finite_n(self):
        n = 100_000
        for c in (-2.0, 2.0):
            q = 1 + c / n
            for x in (0.2, 0.5, 0.8):
                assert abs(pi1_cdf(n, q, math.floor(x * n)) - law_Fc(x, c)) < 1e-3

    @pytest.mark.parametrize("name,params", [("q1", {}), ("Fc", {"c": 2.5}), ("Fc", {"c": -2.5}),
                                             ("uniform", {})])
    def test_cdfs_monotone_with_endpoints(self, name, params):
        law = continuous_law(name, **params)
        v = law.cdf_array(GRID)
        assert np.all(np.diff(v) >= -1e-15)
        assert abs(v[0]) < 1e-10 and abs(v[-1] - 1) < 1e-10

    def test_exponential(self):
        assert law_exponential_cdf(0.0, 2.0) == 0.0
        assert law_exponential_cdf(0.5, 2.0) == pytest.approx(1 - 1 / math.e)
        with pytest.raises(ValueError):
            law_exponential_cdf(1.0, 0.0)
        with pytest.raises(ValueError):
            continuous_law("nope")


class TestDiscreteLimits:
    def test_geometric(self):
        assert law_geometric_pmf(1, 0.3) == pytest.approx(0.7)
        assert math.fsum(law_geometric_pmf(k, 0.6) for k in range(1, 200)) == pytest.approx(1)
        # the finite-n gap is (1-q) q^(k-1) (C_k - k + 1)/n, C_k = sum_{j>=k} q^j/(1-q^j)
        for n in (1000, 1_000_000):
            for k in range(1, 21):
                C = math.fsum(0.5**j / (1 - 0.5**j) for j in range(k, 120))
                gap = pi1_pmf(n, 0.5, k) - law_geometric_pmf(k, 0.5)
                assert gap == pytest.approx(0.5**k * (C - k + 1) / n, rel=1e-6, abs=1e-15)
        assert max(abs(pi1_pmf(10**6, 0.5, k) - law_geometric_pmf(k, 0.5)) for k in range(1, 21)) < 1e-6

    def test_corner_upper(self):
        assert corner_upper_q(100, 2.0, 0) == pytest.approx(0.5 / 100)
        assert corner_upper_q(100, 2.0, 60) == pytest.approx(1 / 100)
        n = 10_000
        for k in range(6):
            assert pi1_pmf(n, 2.0, n - k) / corner_upper_q(n, 2.0, k) == pytest.approx(1, abs=0.01)

    def test_lambda_c(self):
        assert lambda_c(0.0, 0.5) == pytest.approx(math.log(2))
        assert lambda_c(1.0, 0.3) == pytest.approx(law_fc(0.3, 1.0), abs=1e-12)
        assert lambda_c(1e-5, 0.5) == pytest.approx(math.log(2), abs=1e-5)
        assert lambda_c(-1e-5, 0.5) == pytest.approx(math.log(2), abs=1e-5)

    @pytest.mark.parametrize("c", [-5.0, -2.0, -0.5, 0.5, 2.0, 5.0])
    def test_lambda_equals_density(self, c):
        for d in (0.05, 0.3, 0.5, 0.9):
            assert lambda_c(c, d) == pytest.approx(law_fc(d, c), rel=1e-12)

    @pytest.mark.parametrize("c", [-2.0, 0.0, 2.0])
    def test_lambda_is_finite_n_mean(self, c):
        # E N_k = n P(pi_1 = k), k = n/2
        n = 100_000
        mean = n * pi1_pmf(n, 1 + c / n, n // 2)
        assert mean == pytest.approx(lambda_c(c, 0.5), rel=1e-3)


class TestBernoulliSums:
    def test_zsum_examples(self):
        pmf, tb = law_Zsum(2.0, 1)
        assert tb.bound < 1e-12
        assert pmf.prob(1) == pytest.approx(0.5, abs=1e-12)
        series = math.fsum(1 / (2.0**l - 1) for l in range(1, 200))
        assert pmf.prob(2) == pytest.approx(0.25 * series, abs=1e-12)
        assert pmf.prob(0) == 0
        total = math.fsum(pmf.probs)
        assert 1 - tb.bound - 1e-15 <= total <= 1 + 1e-15

    @pytest.mark.parametrize("q", [1.05, 1.5, 3.0, 10.0])
    def test_zsum_first_atom(self, q):
        pmf, _ = law_Zsum(q, 1, tol=1e-12)
        assert pmf.prob(1) == pytest.approx((q - 1) / q, abs=1e-10)

    def test_ysum_examples(self):
        pmf, tb = law_Ysum(2.0, 0)
        assert pmf.support == (0, 1) and pmf.prob(1) == 0.5 and tb.bound == 0
        inf, tb = law_Ysum(2.0)
        prod = math.prod(1 - 2.0 ** -(i + 1) for i in range(64))
        assert inf.prob(0) == pytest.approx(prod, abs=1e-12)
        assert inf.prob(0) == pytest.approx(0.288788, abs=1e-6)
        assert law_Ysum(2.0, 3)[0].support == (0, 1, 2, 3, 4)
        assert tv_distance(law_Ysum(2.0, 60)[0], inf) < 1e-10

    @pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
    def test_zsum_to_ysum(self, q):
        assert tv_distance(law_Zsum(q, 20)[0], law_Ysum(q)[0]) < 0.01

    def test_tail_bound_is_valid(self):
        # compare a coarse truncation with a much finer one
        for q, k in [(1.3, 1), (2.0, 4)]:
            coarse, tb = law_Zsum(q, k, tol=1e-4)
            fine, _ = law_Zsum(q, k, tol=1e-14)
            assert tv_distance(coarse, fine) <= tb.bound


class TestBorel:
    def test_examples(self):
        assert abs(borel_pmf(1) - math.exp(-1)) < 1e-15
        assert borel_pmf(2) == pytest.approx(math.exp(-2), rel=1e-14)
        for j in range(1, 21):
            assert borel_pmf(j) == pytest.approx(borel_pmf_direct(j), rel=1e-12)

    def test_partial_sums(self):
        sums = [borel_cdf(k) for k in (1, 10, 100, 1000)]
        assert sums == sorted(sums) and sums[-1] < 1
        # heavy tail: P(X > J) ~ sqrt(2 / (pi J))
        J = 10_000
        assert 1 - borel_cdf(J) == pytest.approx(math.sqrt(2 / (math.pi * J)), rel=1e-3)

    def test_corners(self):
        assert dh_corner(1, "low") == 2.0
        assert dh_corner(0, "high") == pytest.approx(1 / math.e)
        lows = [dh_corner(k, "low") for k in range(1, 10)]
        assert all(a > b for a, b in zip(lows, lows[1:]))
        with pytest.raises(ValueError):
            dh_corner(1, "middle")


def test_pi1_mean_scaled_limit():
    # int_0^1 (1 - F(x)) dx for x - x log x is 1/4
    assert pi1_mean(100_000, 1.0) / 100_000 == pytest.approx(0.25, abs=1e-4)
