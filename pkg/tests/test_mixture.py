import math

import numpy as np
import pytest

from svol.mixture import (
    MixtureState,
    MixtureTable,
    default_table,
    indicator_posteriors,
    mixture_logdensity,
    sample_indicators,
)


def exact_log_chi2_density(x):
    # Density of log(eps^2) for standard normal eps.
    return np.exp(x / 2.0 - np.exp(x) / 2.0) / math.sqrt(2.0 * math.pi)


class TestTable:
    def test_weights_sum_to_one(self):
        t = default_table()
        assert abs(t.weights.sum() - 1.0) <= 1e-12
        assert np.all(t.variances > 0)

    def test_moments_match_log_chi2(self):
        t = default_table()
        # log chi^2_1 has mean psi(1/2) + log 2 ~ -1.2704, variance pi^2/2.
        assert abs(t.mean() - (-1.2704)) < 1e-2
        assert abs(t.variance() - math.pi ** 2 / 2.0) < 5e-2

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            MixtureTable(np.array([0.6, 0.6]), np.zeros(2), np.ones(2))
        with pytest.raises(ValueError):
            MixtureTable(np.array([0.5, 0.5]), np.zeros(2),
                         np.array([1.0, 0.0]))


class TestLogDensity:
    def test_single_component(self):
        t = MixtureTable(np.array([1.0]), np.array([0.0]), np.array([1.0]))
        assert mixture_logdensity(0.0, t) == pytest.approx(
            -0.5 * math.log(2 * math.pi), abs=1e-14)

    def test_integrates_to_one(self):
        t = default_table()
        x = np.linspace(-25.0, 6.0, 20001)
        dens = np.exp(mixture_logdensity(x, t))
        # Composite Simpson quadrature on the uniform grid.
        h = x[1] - x[0]
        integral = h / 3.0 * (dens[0] + dens[-1] + 4 * dens[1:-1:2].sum()
                              + 2 * dens[2:-1:2].sum())
        assert abs(integral - 1.0) < 1e-6

    def test_total_variation_to_exact(self):
        t = default_table()
        x = np.linspace(-25.0, 6.0, 10_000)
        diff = np.abs(np.exp(mixture_logdensity(x, t))
                      - exact_log_chi2_density(x))
        tv = 0.5 * np.trapezoid(diff, x)
        assert tv < 1e-2

    def test_extreme_argument_stays_finite(self):
        t = default_table()
        assert np.isfinite(mixture_logdensity(-700.0, t))
        assert np.isfinite(mixture_logdensity(700.0, t))


class TestIndicatorPosteriors:
    def test_rows_sum_to_one(self):
        t = default_table()
        rng = np.random.default_rng(0)
        probs = indicator_posteriors(rng.normal(-1.27, 2.2, size=500), t)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, rtol=0, atol=1e-12)

    def test_matches_direct_evaluation(self):
        t = default_table()
        resid = np.array([-3.7, 0.4, 2.0])
        log_terms = (np.log(t.weights)[None, :]
                     - np.log(np.sqrt(t.variances))[None, :]
                     - (resid[:, None] - t.means[None, :]) ** 2
                     / (2 * t.variances)[None, :])
        expected = np.exp(log_terms)
        expected /= expected.sum(axis=1, keepdims=True)
        np.testing.assert_allclose(indicator_posteriors(resid, t), expected,
                                   rtol=1e-12)

    def test_shift_invariance_is_bitwise(self):
        # All inputs are dyadic rationals, so shifting residuals and table
        # means by +700 is exact and results must match bit for bit.
        base_means = np.array([-2.0, -0.5, 0.25, 1.5])
        table_lo = MixtureTable(np.full(4, 0.25), base_means,
                                np.array([0.5, 1.0, 2.0, 4.0]))
        table_hi = MixtureTable(np.full(4, 0.25), base_means + 700.0,
                                np.array([0.5, 1.0, 2.0, 4.0]))
        resid = np.array([-1.0, -0.25, 0.0, 0.75, 1.0])

        p_lo = indicator_posteriors(resid, table_lo)
        p_hi = indicator_posteriors(resid + 700.0, table_hi)
        assert np.array_equal(p_lo, p_hi)

        rng1 = np.random.default_rng(99)
        rng2 = np.random.default_rng(99)
        s_lo = sample_indicators(resid, table_lo, rng1)
        s_hi = sample_indicators(resid + 700.0, table_hi, rng2)
        np.testing.assert_array_equal(s_lo.indicators, s_hi.indicators)


class TestSampleIndicators:
    def test_degenerate_table(self):
        t = MixtureTable(np.array([0.0, 1.0, 0.0]),
                         np.array([-5.0, 0.0, 5.0]), np.ones(3))
        s = sample_indicators(np.linspace(-3, 3, 50), t,
                              np.random.default_rng(1))
        assert np.all(s.indicators == 1)

    def test_sharp_component_captures(self):
        # Component 0 is extremely tight at the residual value; its posterior
        # weight exceeds 0.999, so empirical frequency must exceed 0.99.
        t = MixtureTable(np.array([0.5, 0.5]), np.array([2.0, 0.0]),
                         np.array([1e-6, 1.0]))
        probs = indicator_posteriors(np.array([2.0]), t)
        assert probs[0, 0] > 0.999
        s = sample_indicators(np.full(10_000, 2.0), t,
                              np.random.default_rng(2))
        assert np.mean(s.indicators == 0) > 0.99

    def test_frequencies_match_bruteforce_posterior(self):
        t = default_table()
        resid_value = -2.3
        n = 100_000
        probs = indicator_posteriors(np.array([resid_value]), t)[0]
        s = sample_indicators(np.full(n, resid_value), t,
                              np.random.default_rng(3))
        counts = np.bincount(s.indicators, minlength=10)
        for k in range(10):
            se = math.sqrt(max(probs[k] * (1 - probs[k]), 1e-12) / n)
            assert abs(counts[k] / n - probs[k]) < 4 * se + 1e-12

    def test_huge_residual_no_overflow(self):
        t = default_table()
        s = sample_indicators(np.array([1e3, -1e3]), t,
                              np.random.default_rng(4))
        assert s.indicators.shape == (2,)

    def test_state_type_roundtrip(self):
        s = MixtureState(np.array([0, 9, 3]))
        assert s.indicators.dtype == np.int64
