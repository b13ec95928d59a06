import math

import numpy as np
import pytest

from viralcm.special import (
    DiscretePmf,
    pgf_derivative,
    pgf_eval,
    poisson_pmf,
    polylog,
    stirling2,
    stirling1_signed,
    zeta,
    zipf_pmf,
)


def brute_polylog(beta, x, terms=10**6):
    """Independent oracle: plain partial sum plus an integral tail estimate."""
    k = np.arange(1, terms + 1, dtype=np.float64)
    partial = float(np.sum(k ** (-beta) * x**k))
    # tail after `terms` is below the geometric bound; negligible for x <= 0.9
    tail_bound = (terms + 1.0) ** (-beta) * x ** (terms + 1) / (1.0 - x) if x < 1 else 0.0
    return partial, tail_bound


def brute_stirling2(n, k, cache={}):
    """Independent oracle: the recurrence {n,k} = {n-1,k-1} + k {n-1,k}."""
    if k > n:
        return 0
    if n == 0:
        return 1 if k == 0 else 0
    if k == 0:
        return 0
    if (n, k) not in cache:
        cache[(n, k)] = brute_stirling2(n - 1, k - 1) + k * brute_stirling2(n - 1, k)
    return cache[(n, k)]


class TestZeta:
    def test_classical_value(self):
        assert zeta(2.0) == pytest.approx(math.pi**2 / 6.0, abs=1e-12)

    def test_normalizes_power_law_weights(self):
        beta = 2.45
        v = zeta(beta)
        k = np.arange(1, 10**6 + 1, dtype=np.float64)
        partial = float(np.sum(k ** (-beta)))
        m = 1e6
        tail = m ** (1 - beta) / (beta - 1) + 0.5 * m ** (-beta)  # Euler-Maclaurin
        assert (partial + tail) / v == pytest.approx(1.0, abs=1e-8)

    def test_zipf_mean_near_two_at_2_45(self):
        # mean degree quoted as ~2 for the beta = 2.45 example
        mean = zeta(1.45) / zeta(2.45)
        assert mean == pytest.approx(2.0, rel=0.05)

    @pytest.mark.parametrize("bad", [1.0, 0.5, -3.0, 1.0000005])
    def test_domain_error(self, bad):
        with pytest.raises(ValueError):
            zeta(bad)


class TestPolylog:
    def test_empty_sum_at_zero(self):
        assert polylog(2.45, 0.0) == 0.0

    def test_equals_zeta_at_one(self):
        assert polylog(2.0, 1.0) == pytest.approx(math.pi**2 / 6.0, abs=1e-12)

    def test_against_direct_summation(self):
        val = polylog(2.45, 0.5)
        partial, tail = brute_polylog(2.45, 0.5)
        assert tail < 1e-15
        assert val == pytest.approx(partial, abs=1e-10)

    @pytest.mark.parametrize("beta", [1.15, 1.45, 2.0, 2.45, 3.2])
    def test_monotone_in_x(self, beta):
        xs = np.linspace(0.0, 1.0, 41)
        vals = [polylog(beta, float(x)) for x in xs]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_accurate_near_one(self):
        # adaptive chunking must still certify 1e-10 when the series is long
        partial, tail = brute_polylog(1.45, 0.999, terms=200_000)
        assert polylog(1.45, 0.999) == pytest.approx(partial + tail / 2, abs=1e-9)

    @pytest.mark.parametrize("bad", [-0.1, 1.1, 2.0])
    def test_domain_error(self, bad):
        with pytest.raises(ValueError):
            polylog(2.0, bad)

    def test_beta_at_most_one_rejected_at_x_one(self):
        with pytest.raises(ValueError):
            polylog(0.9, 1.0)


class TestStirling:
    def test_partitions_of_three_into_two(self):
        assert stirling2(3, 2) == 3

    def test_singletons(self):
        for k in range(11):
            assert stirling2(k, k) == 1

    def test_known_value(self):
        assert brute_stirling2(10, 4) == 34105
        assert stirling2(10, 4) == 34105

    def test_recurrence_exact_to_30(self):
        for n in range(1, 31):
            for k in range(1, n + 1):
                assert stirling2(n, k) == stirling2(n - 1, k - 1) + k * stirling2(n - 1, k)

    def test_vanishes_above_diagonal(self):
        assert stirling2(4, 7) == 0

    def test_inclusion_exclusion_oracle(self):
        # {n,k} = (1/k!) sum_i (-1)^i C(k,i) (k-i)^n
        for n in range(0, 12):
            for k in range(0, n + 1):
                acc = sum(
                    (-1) ** i * math.comb(k, i) * (k - i) ** n for i in range(k + 1)
                )
                expected = acc // math.factorial(k) if k else (1 if n == 0 else 0)
                assert stirling2(n, k) == expected

    def test_falling_factorial_expansion(self):
        # (d)_n = sum_s s1(n, s) d^s for arbitrary integers d
        for n in range(0, 9):
            for d in range(0, 15):
                falling = 1
                for i in range(n):
                    falling *= d - i
                via_s1 = sum(stirling1_signed(n, s) * d**s for s in range(n + 1))
                assert falling == via_s1

    def test_negative_arguments_rejected(self):
        with pytest.raises(ValueError):
            stirling2(-1, 0)


class TestDiscretePmf:
    def test_weights_must_normalize(self):
        with pytest.raises(ValueError):
            DiscretePmf(np.array([0, 1]), np.array([0.6, 0.6]))

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            DiscretePmf(np.array([0, 1]), np.array([1.5, -0.5]))

    def test_truncated_laws_normalize_within_1e9(self):
        for pmf in (poisson_pmf(2.0), poisson_pmf(6.0), zipf_pmf(3.2, tail_mass=1e-12)):
            assert abs(pmf.weights.sum() - 1.0) <= 1e-9


class TestPgfEval:
    def test_normalization_at_one(self):
        pmf = poisson_pmf(2.0)
        assert pgf_eval(pmf, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_poisson_closed_form(self):
        pmf = poisson_pmf(2.0)
        assert pgf_eval(pmf, 0.3) == pytest.approx(math.exp(2.0 * (0.3 - 1.0)), abs=1e-8)

    def test_zipf_matches_polylog_ratio(self):
        beta = 2.45
        pmf = zipf_pmf(beta, tail_mass=1e-9)
        for x in (0.3, 0.7, 0.95):
            assert pgf_eval(pmf, x) == pytest.approx(
                polylog(beta, x) / zeta(beta), abs=1e-8
            )

    def test_monotone_and_convex(self):
        pmf = poisson_pmf(3.0)
        xs = np.linspace(0.0, 1.0, 100)
        vals = pgf_eval(pmf, xs)
        diffs = np.diff(vals)
        assert np.all(diffs >= -1e-12)
        assert np.all(np.diff(diffs) >= -1e-12)  # convexity

    def test_domain_error(self):
        with pytest.raises(ValueError):
            pgf_eval(poisson_pmf(1.0), 1.5)


class TestPgfDerivative:
    def test_mean_at_one(self):
        pmf = poisson_pmf(2.0)
        assert pgf_derivative(pmf, 1.0) == pytest.approx(pmf.mean(), abs=1e-10)

    def test_poisson_closed_form(self):
        pmf = poisson_pmf(2.0)
        for x in (0.0, 0.4, 0.9):
            assert pgf_derivative(pmf, x) == pytest.approx(
                2.0 * math.exp(2.0 * (x - 1.0)), abs=1e-8
            )

    def test_zipf_term_by_term_oracle(self):
        beta = 2.45
        pmf = zipf_pmf(beta, tail_mass=1e-9)
        z = zeta(beta)
        for x in (0.2, 0.5, 0.8):
            k = np.arange(1, 200_001, dtype=np.float64)
            oracle = float(np.sum(k ** (1.0 - beta) * x ** (k - 1.0))) / z
            assert pgf_derivative(pmf, x) == pytest.approx(oracle, abs=1e-8)


class TestZipfPmf:
    def test_heavy_tail_materialization_rejected(self):
        with pytest.raises(ValueError):
            zipf_pmf(2.45, tail_mass=1e-12, max_atoms=1000)
