import math

import numpy as np
import pytest
from scipy import stats

from svol.model import (
    Dataset,
    LatentPath,
    Parameterization,
    Parameters,
    Priors,
    linearize,
    log_prior,
    simulate,
    transform_path,
)


class TestTypes:
    def test_parameters_invariants(self):
        p = Parameters(mu=-10.0, phi=0.95, sigma=0.2)
        assert p.gamma() == pytest.approx((1 - 0.95) * -10.0)
        assert p.omega() == pytest.approx(math.exp(-10.0))
        with pytest.raises(ValueError):
            Parameters(mu=0.0, phi=1.0, sigma=1.0)
        with pytest.raises(ValueError):
            Parameters(mu=0.0, phi=0.0, sigma=0.0)
        with pytest.raises(ValueError):
            Parameters(mu=math.nan, phi=0.0, sigma=1.0)

    def test_priors_reject_nonpositive(self):
        with pytest.raises(ValueError):
            Priors(a0=0.0)
        with pytest.raises(ValueError):
            Priors(B_sigma=-1.0)

    def test_path_needs_two_states(self):
        with pytest.raises(ValueError):
            LatentPath(np.array([1.0]), Parameterization.CENTERED)


class TestLogPrior:
    def test_uniform_phi_case(self):
        # a0 = b0 = 1 makes the phi prior uniform on (-1, 1), density 1/2.
        pr = Priors(b_mu=0.0, B_mu=1.0, a0=1.0, b0=1.0, B_sigma=1.0)
        got = log_prior(Parameters(0.0, 0.0, 1.0), pr)
        expected = (stats.norm.logpdf(0.0, 0.0, 1.0) + math.log(0.5)
                    + stats.gamma.logpdf(1.0, a=0.5, scale=2.0))
        assert got == pytest.approx(expected, abs=1e-12)

    def test_boundary_is_minus_inf(self):
        pr = Priors()
        assert log_prior((0.0, 1.0, 1.0), pr) == -math.inf
        assert log_prior((0.0, -1.0, 1.0), pr) == -math.inf
        assert log_prior((0.0, 0.0, 0.0), pr) == -math.inf

    def test_against_scipy_closed_form(self):
        b0 = 80.0 / 1.95 - 40.0
        pr = Priors(b_mu=-10.0, B_mu=10.0, a0=40.0, b0=b0, B_sigma=0.04)
        p = Parameters(mu=-10.0, phi=0.95, sigma=0.2)
        # Independent evaluation of the three closed-form log densities.
        lp_mu = stats.norm.logpdf(-10.0, -10.0, math.sqrt(10.0))
        # (phi+1)/2 ~ Beta(a0, b0); change of variables adds log(1/2).
        lp_phi = stats.beta.logpdf((0.95 + 1) / 2, 40.0, b0) + math.log(0.5)
        lp_sig = stats.gamma.logpdf(0.2 ** 2, a=0.5, scale=2 * 0.04)
        assert log_prior(p, pr) == pytest.approx(lp_mu + lp_phi + lp_sig,
                                                 abs=1e-10)

    def test_symmetric_for_equal_shape_parameters(self):
        pr = Priors(a0=3.5, b0=3.5)
        for phi in (0.1, 0.5, 0.93, 0.9999):
            lp_pos = log_prior((0.0, phi, 1.0), pr)
            lp_neg = log_prior((0.0, -phi, 1.0), pr)
            assert lp_pos == lp_neg  # exact, not approx

    def test_continuous_on_interior(self):
        pr = Priors(a0=2.0, b0=2.0)
        grid = np.linspace(-0.999999, 0.999999, 1001)
        vals = [log_prior((0.0, g, 0.5), pr) for g in grid]
        assert np.all(np.isfinite(vals))


class TestTransformPath:
    def test_centering(self):
        p = Parameters(mu=-3.0, phi=0.5, sigma=2.0)
        path = LatentPath(np.full(5, -3.0), Parameterization.CENTERED)
        out = transform_path(path, p, Parameterization.NONCENTERED)
        np.testing.assert_array_equal(out.states, np.zeros(5))
        assert out.parameterization is Parameterization.NONCENTERED

    def test_hand_case(self):
        p = Parameters(mu=-10.0, phi=0.5, sigma=0.2)
        path = LatentPath(np.array([-9.8, -10.2]), Parameterization.CENTERED)
        out = transform_path(path, p, Parameterization.NONCENTERED)
        np.testing.assert_allclose(out.states, [1.0, -1.0])

    def test_noop_when_same_tag(self):
        p = Parameters(mu=0.0, phi=0.0, sigma=1.0)
        path = LatentPath(np.array([1.0, 2.0]), Parameterization.CENTERED)
        assert transform_path(path, p, Parameterization.CENTERED) is path

    @pytest.mark.parametrize("sigma", [1e-8, 1e-3, 1.0, 1e4, 1e8])
    def test_round_trip(self, sigma):
        rng = np.random.default_rng(1)
        p = Parameters(mu=rng.normal(), phi=0.9, sigma=sigma)
        path = LatentPath(rng.normal(size=64), Parameterization.CENTERED)
        back = transform_path(
            transform_path(path, p, Parameterization.NONCENTERED),
            p, Parameterization.CENTERED)
        scale = max(1.0, np.max(np.abs(path.states)))
        assert np.max(np.abs(back.states - path.states)) < 1e-12 * scale


class TestSimulate:
    def test_iid_limit_moments(self):
        # phi = 0: the state equation is h_t ~ N(mu, sigma^2) iid.
        p = Parameters(mu=-2.0, phi=0.0, sigma=0.7)
        y, path = simulate(p, 100_000, np.random.default_rng(42))
        h = path.states[1:]
        se_mean = 0.7 / np.sqrt(h.size)
        assert abs(h.mean() - -2.0) < 4 * se_mean
        se_var = 0.49 * np.sqrt(2.0 / h.size)
        assert abs(h.var() - 0.49) < 4 * se_var

    def test_small_sigma_limit(self):
        p = Parameters(mu=-1.0, phi=0.5, sigma=1e-12)
        y, path = simulate(p, 50_000, np.random.default_rng(0))
        assert np.max(np.abs(path.states - -1.0)) < 1e-10
        # y is then marginally N(0, exp(mu)).
        assert abs(y.var() - math.exp(-1.0)) < 0.02
        assert abs(y.mean()) < 0.01

    def test_lag_one_autocorrelation(self):
        p = Parameters(mu=-10.0, phi=0.95, sigma=0.3)
        _, path = simulate(p, 100_000, np.random.default_rng(7))
        h = path.states
        hc = h - h.mean()
        rho1 = (hc[1:] * hc[:-1]).sum() / (hc * hc).sum()
        se = math.sqrt((1 - 0.95 ** 2) / h.size)
        assert abs(rho1 - 0.95) < 3 * se

    def test_deterministic_given_rng_state(self):
        p = Parameters(mu=-10.0, phi=0.9, sigma=0.2)
        y1, p1 = simulate(p, 100, np.random.default_rng(5))
        y2, p2 = simulate(p, 100, np.random.default_rng(5))
        np.testing.assert_array_equal(y1, y2)
        np.testing.assert_array_equal(p1.states, p2.states)

    def test_rejects_bad_horizon(self):
        with pytest.raises(ValueError):
            simulate(Parameters(0.0, 0.0, 1.0), 0, np.random.default_rng(0))


class TestLinearize:
    def test_unit_return_no_offset(self):
        ds = linearize(np.array([1.0]), offset_c=0.0)
        np.testing.assert_allclose(ds.y_tilde, [0.0])

    def test_zero_return_with_offset(self):
        ds = linearize(np.array([0.0]), offset_c=1e-4)
        np.testing.assert_allclose(ds.y_tilde, [math.log(1e-4)])

    def test_hand_values(self):
        ds = linearize(np.array([0.01, -0.02]), offset_c=1e-4)
        np.testing.assert_allclose(
            ds.y_tilde, [math.log(2e-4), math.log(5e-4)], rtol=1e-14)

    def test_zero_return_no_offset_is_error(self):
        with pytest.raises(ValueError):
            linearize(np.array([0.0, 1.0]), offset_c=0.0)

    def test_default_offsets(self):
        assert linearize(np.array([1.0, 2.0])).offset_c == 1e-4
        assert linearize(np.array([1.0, 2.0]), demean=True).offset_c == 1e-3

    def test_demean_uses_full_sample_mean(self):
        y = np.array([0.03, -0.01, 0.01])
        ds = linearize(y, demean=True)
        expected = np.log((y - y.mean()) ** 2 + 1e-3)
        np.testing.assert_allclose(ds.y_tilde, expected)
        assert ds.demeaned

    def test_dataset_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Dataset(np.array([1.0]), np.array([math.inf]), 0.0, False)
