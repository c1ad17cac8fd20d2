import math

import numpy as np
import pytest

from svol.diagnostics import (
    DiagnosticError,
    EfficiencySummary,
    GEWEKE_PRIORS,
    efficiency_summary,
    geweke_test,
    inefficiency_factor,
    marginal_joint_stats,
    summarize,
)
from svol.model import Parameters, simulate
from svol.samplers import ChainOutput


def ar1_chain(coef, n, seed):
    # The state recursion of the model at (mu=0, phi=coef, sigma=1) is an
    # AR(1) with unit innovations; reuse it as the chain generator.
    _, path = simulate(Parameters(0.0, coef, 1.0), n,
                       np.random.default_rng(seed))
    return path.states[1:]


def chain_output(draws):
    return ChainOutput(draws=draws, latent_draws=None, accept={},
                       warn_count=0, seconds_per_1000=0.0, scheme="c2",
                       burnin=0, n_obs=10)


class TestInefficiencyFactor:
    def test_white_noise(self):
        x = np.random.default_rng(0).standard_normal(100_000)
        assert 0.9 <= inefficiency_factor(x) <= 1.15

    def test_ar1_half(self):
        # tau = (1 + a) / (1 - a) = 3 for a = 0.5.
        x = ar1_chain(0.5, 1_000_000, 1)
        assert abs(inefficiency_factor(x) - 3.0) <= 0.10 * 3.0

    def test_ar1_persistent(self):
        # a = 0.9 -> tau = 19.
        x = ar1_chain(0.9, 1_000_000, 2)
        assert abs(inefficiency_factor(x) - 19.0) <= 0.15 * 19.0

    def test_affine_invariance(self):
        x = ar1_chain(0.7, 50_000, 3)
        base = inefficiency_factor(x)
        for a, b in ((2.5, -100.0), (-0.03, 7.0)):
            assert abs(inefficiency_factor(a * x + b) - base) <= 1e-8 * base

    def test_constant_chain_raises(self):
        with pytest.raises(DiagnosticError):
            inefficiency_factor(np.full(1000, 3.14))

    def test_short_chain_raises(self):
        with pytest.raises(DiagnosticError):
            inefficiency_factor(np.arange(100, dtype=float))

    def test_batch_method(self):
        x = ar1_chain(0.5, 500_000, 4)
        assert abs(inefficiency_factor(x, method="batch") - 3.0) <= 0.75
        with pytest.raises(ValueError):
            inefficiency_factor(x, method="nope")


class TestSummaries:
    def test_counting_chain_moments(self):
        draws = np.column_stack([np.arange(1.0, 101.0)] * 3)
        s = summarize(chain_output(draws))
        assert s["mu"].mean == pytest.approx(50.5)
        assert s["mu"].q50 == pytest.approx(50.5)
        # Too short for the inefficiency estimator: marked undefined.
        assert s["mu"].inefficiency is None

    def test_constant_column_isolated(self):
        rng = np.random.default_rng(5)
        draws = np.column_stack([
            ar1_chain(0.3, 2000, 6),
            rng.standard_normal(2000),
            np.full(2000, 0.25),
        ])
        s = summarize(chain_output(draws))
        assert s["mu"].inefficiency is not None
        assert s["phi"].inefficiency is not None
        assert s["sigma"].inefficiency is None
        assert s["sigma"].mean == pytest.approx(0.25)

    def test_ess_if_identity(self):
        draws = np.column_stack([ar1_chain(0.4, 5000, seed) for seed in
                                 (7, 8, 9)])
        eff = efficiency_summary(chain_output(draws))
        assert eff.ess_mu * eff.if_mu == pytest.approx(eff.M, rel=1e-12)
        assert eff.ess_phi * eff.if_phi == pytest.approx(eff.M, rel=1e-12)
        assert eff.ess_sigma * eff.if_sigma == pytest.approx(eff.M, rel=1e-12)

    def test_quantiles_by_linear_interpolation(self):
        draws = np.column_stack([np.arange(1.0, 201.0)] * 3)
        s = summarize(chain_output(draws))
        assert s["phi"].q05 == pytest.approx(np.quantile(draws[:, 1], 0.05))

    def test_from_factors(self):
        eff = EfficiencySummary.from_factors(2.0, 4.0, 5.0, 1000)
        assert eff.ess_mu == 500.0 and eff.ess_sigma == 200.0


class TestGeweke:
    def test_null_calibration_two_marginal_runs(self):
        # Two independent draws from the same joint: all |z| < 4.
        n = 40_000
        a = marginal_joint_stats(50, GEWEKE_PRIORS, n,
                                 np.random.default_rng(10))
        b = marginal_joint_stats(50, GEWEKE_PRIORS, n,
                                 np.random.default_rng(11))
        z = ((a.mean(axis=0) - b.mean(axis=0))
             / np.sqrt(a.var(axis=0, ddof=1) / n + b.var(axis=0, ddof=1) / n))
        assert np.max(np.abs(z)) < 4.0

    def test_marginal_moments_match_prior(self):
        n = 200_000
        stats = marginal_joint_stats(30, GEWEKE_PRIORS, n,
                                     np.random.default_rng(12))
        # mu ~ N(b_mu, B_mu); sigma^2 ~ B_sigma * chi2(1).
        se_mu = math.sqrt(GEWEKE_PRIORS.B_mu / n)
        assert abs(stats[:, 0].mean() - GEWEKE_PRIORS.b_mu) < 4 * se_mu
        s2 = stats[:, 4]
        assert abs(s2.mean() - GEWEKE_PRIORS.B_sigma) < 4 * s2.std() / math.sqrt(n)
        phi_mean = 2 * GEWEKE_PRIORS.a0 / (GEWEKE_PRIORS.a0
                                           + GEWEKE_PRIORS.b0) - 1
        assert abs(stats[:, 2].mean() - phi_mean) < 4 * stats[:, 2].std() / math.sqrt(n)

    def test_geweke_passes_for_c2_quick(self):
        res = geweke_test("c2", T=50, priors=None, n_outer=30_000,
                          rng=np.random.default_rng(13))
        assert res.passed(threshold=4.0)
        assert res.z_scores.shape == (8,)

    def test_threshold_zero_always_fails(self):
        res = geweke_test("nc2", T=30, priors=None, n_outer=5_000,
                          rng=np.random.default_rng(14))
        assert not res.passed(threshold=0.0)
