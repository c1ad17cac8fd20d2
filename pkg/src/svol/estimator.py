"""Scikit-learn style front end for fitting the SV model to a return series.

The estimator wraps the functional core (linearization, chain, summaries)
behind the usual fit/get_params surface so it can sit in pipelines, be
cloned, and be grid-searched over its configuration.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .diagnostics import PosteriorSummary, summarize
from .model import Parameters, Priors, linearize
from .samplers import ChainState, SamplerConfig, run_chain
from .validation import check_returns

__all__ = ["SVolEstimator"]


class SVolEstimator(BaseEstimator):
    """Bayesian stochastic volatility estimation via MCMC.

    Parameters
    ----------
    scheme : str
        Sampling scheme: "c1", "c2", "c3", "nc2", "nc3", "gis-c", "gis-nc".
        The interweaved defaults are robust across the parameter range.
    draws, burnin : int
        Stored sweeps and warm-up sweeps.
    thin_latent : int
        Keep every thin_latent-th latent path for the volatility bands.
    b_mu, B_mu, a0, b0, B_sigma : float
        Prior hyperparameters: mu ~ N(b_mu, B_mu), (phi+1)/2 ~ Beta(a0, b0),
        sigma^2 ~ B_sigma * chi2(1).
    demean : bool
        Subtract the sample mean of the returns before linearizing.
    offset : float
        Constant added inside log((y - mean)^2 + offset); keep at 0 unless
        the (de-meaned) series contains exact zeros.
    gis_blocks : int
        Parameter-update blocking on both interweaving legs (2 or 3).
    random_state : int, Generator or None
        Seed for the chain's generator.

    Attributes
    ----------
    draws_ : ndarray of shape (draws, 3)
        Stored posterior draws, columns (mu, phi, sigma).
    summary_ : PosteriorSummary
        Moments, quantiles, inefficiency factors, effective sample sizes.
    params_ : Parameters
        Posterior means packed as a parameter triple.
    volatility_path_ : ndarray of shape (n_obs, 3)
        Pointwise mean and central 90% band of 100 exp(h_t / 2), i.e. the
        latent volatility as daily percent.
    """

    def __init__(self, scheme: str = "gis-c", draws: int = 20_000,
                 burnin: int = 2_000, thin_latent: int = 20,
                 b_mu: float = -10.0, B_mu: float = 100.0, a0: float = 20.0,
                 b0: float = 1.5, B_sigma: float = 1.0, demean: bool = True,
                 offset: float = 0.0, gis_blocks: int = 2,
                 random_state=None):
        self.scheme = scheme
        self.draws = draws
        self.burnin = burnin
        self.thin_latent = thin_latent
        self.b_mu = b_mu
        self.B_mu = B_mu
        self.a0 = a0
        self.b0 = b0
        self.B_sigma = B_sigma
        self.demean = demean
        self.offset = offset
        self.gis_blocks = gis_blocks
        self.random_state = random_state

    def _priors(self) -> Priors:
        return Priors(b_mu=self.b_mu, B_mu=self.B_mu, a0=self.a0,
                      b0=self.b0, B_sigma=self.B_sigma)

    def _config(self) -> SamplerConfig:
        return SamplerConfig(scheme=self.scheme, draws=self.draws,
                             burnin=self.burnin,
                             thin_latent=self.thin_latent,
                             store_latent=True, gis_blocks=self.gis_blocks)

    def fit(self, X, y=None):
        """Run the configured chain on a return series.

        Parameters
        ----------
        X : array-like of shape (n_obs,) or (n_obs, 1)
            Returns (not prices; convert and de-mean upstream or rely on
            the ``demean`` flag).
        """
        returns = check_returns(X)
        data = linearize(returns, offset_c=self.offset, demean=self.demean)
        priors = self._priors()
        cfg = self._config()
        rng = np.random.default_rng(self.random_state)
        init = ChainState.initial(data, priors, cfg, rng)
        out = run_chain(data, priors, cfg, init)

        self.n_obs_ = data.n_obs
        self.dataset_ = data
        self.output_ = out
        self.draws_ = out.draws
        self.latent_draws_ = out.latent_draws
        self.summary_ = summarize(out)
        self.accept_ = out.accept
        m = out.draws.mean(axis=0)
        self.params_ = Parameters(mu=float(m[0]), phi=float(m[1]),
                                  sigma=float(m[2]))
        self.volatility_path_ = self._volatility_band(out)
        return self

    def _volatility_band(self, out) -> np.ndarray:
        # h_0 is the pre-sample state; the band covers observation times.
        vol = 100.0 * np.exp(out.latent_draws[:, 1:] / 2.0)
        band = np.empty((vol.shape[1], 3))
        band[:, 0] = vol.mean(axis=0)
        band[:, 1] = np.quantile(vol, 0.05, axis=0)
        band[:, 2] = np.quantile(vol, 0.95, axis=0)
        return band

    def predict_volatility(self) -> np.ndarray:
        """Posterior-mean percent volatility per observation time."""
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "volatility_path_")
        return self.volatility_path_[:, 0]

    def thinned_draws(self, max_rows: int = 1000) -> np.ndarray:
        """Evenly thinned parameter draws for scatter plots."""
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "draws_")
        step = max(1, self.draws_.shape[0] // max_rows)
        return self.draws_[::step]
