"""Model types for the vanilla stochastic volatility model.

Returns y_t = exp(h_t / 2) eps_t with a latent AR(1) log-variance path
h_t = mu + phi (h_{t-1} - mu) + sigma eta_t.  The same path can be carried
either on its natural (centered) scale or standardized (non-centered) as
(h - mu) / sigma; both parameterizations are first-class here because the
samplers switch between them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "Parameterization",
    "Parameters",
    "Priors",
    "LatentPath",
    "Dataset",
    "log_prior",
    "transform_path",
    "simulate",
    "linearize",
    "DEFAULT_OFFSET_RAW",
    "DEFAULT_OFFSET_DEMEANED",
]

# Offset constants guarding log(0) in the linearized observations.  The raw
# and de-meaned variants have different conventional values; both are
# overridable per call.
DEFAULT_OFFSET_RAW = 1e-4
DEFAULT_OFFSET_DEMEANED = 1e-3


class Parameterization(enum.Enum):
    CENTERED = "centered"
    NONCENTERED = "noncentered"


@dataclass(frozen=True)
class Parameters:
    """SV model parameters: level, persistence, volatility of volatility."""

    mu: float
    phi: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.phi)
                and math.isfinite(self.sigma)):
            raise ValueError("parameters must be finite")
        if not abs(self.phi) < 1.0:
            raise ValueError(f"|phi| must be < 1, got {self.phi}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def gamma(self) -> float:
        """Regression intercept (1 - phi) * mu of the latent AR(1)."""
        return (1.0 - self.phi) * self.mu

    def omega(self) -> float:
        """Level of the return variance, exp(mu)."""
        return math.exp(self.mu)


@dataclass(frozen=True)
class Priors:
    """Hyperparameters of the independent priors on (mu, phi, sigma^2).

    mu ~ N(b_mu, B_mu), (phi + 1)/2 ~ Beta(a0, b0), and sigma^2 is
    B_sigma times a chi^2 with one degree of freedom, i.e.
    Gamma(1/2, rate 1/(2 B_sigma)).
    """

    b_mu: float = -10.0
    B_mu: float = 100.0
    a0: float = 20.0
    b0: float = 1.5
    B_sigma: float = 1.0

    def __post_init__(self):
        if not all(map(math.isfinite, (self.b_mu, self.B_mu, self.a0,
                                       self.b0, self.B_sigma))):
            raise ValueError("prior hyperparameters must be finite")
        for name in ("B_mu", "a0", "b0", "B_sigma"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class LatentPath:
    """Latent log-variance path h_0 ... h_T with its parameterization tag."""

    states: np.ndarray
    parameterization: Parameterization

    def __post_init__(self):
        states = np.ascontiguousarray(self.states, dtype=np.float64)
        if states.ndim != 1 or states.size < 2:
            raise ValueError("path needs at least two states (h_0 and h_1)")
        if not np.all(np.isfinite(states)):
            raise ValueError("path states must be finite")
        object.__setattr__(self, "states", states)

    @property
    def horizon(self) -> int:
        """Number of observation times T (states run 0..T)."""
        return self.states.size - 1


@dataclass(frozen=True)
class Dataset:
    """Observed returns together with their log-squared linearization."""

    y: np.ndarray
    y_tilde: np.ndarray
    offset_c: float
    demeaned: bool

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        y_tilde = np.ascontiguousarray(self.y_tilde, dtype=np.float64)
        if y.ndim != 1 or y_tilde.shape != y.shape:
            raise ValueError("y and y_tilde must be matching 1-d arrays")
        if not np.all(np.isfinite(y_tilde)):
            raise ValueError("linearized observations must be finite "
                             "(zero return with offset_c = 0?)")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_tilde", y_tilde)

    @property
    def n_obs(self) -> int:
        return self.y.size


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def log_prior_phi(phi: float, priors: Priors) -> float:
    """Log density of the shifted-Beta prior on the persistence."""
    if not abs(phi) < 1.0:
        return -math.inf
    # The shape terms are summed first so that a0 == b0 gives an exactly
    # symmetric density (IEEE addition commutes but does not associate).
    shape_terms = ((priors.a0 - 1.0) * math.log((1.0 + phi) / 2.0)
                   + (priors.b0 - 1.0) * math.log((1.0 - phi) / 2.0))
    return -math.log(2.0) - _log_beta(priors.a0, priors.b0) + shape_terms


def log_prior_sigma2(sigma2: float, priors: Priors) -> float:
    """Log density of the scaled-chi^2 prior, evaluated in sigma^2."""
    if not sigma2 > 0.0:
        return -math.inf
    rate = 1.0 / (2.0 * priors.B_sigma)
    return (0.5 * math.log(rate) - math.lgamma(0.5)
            - 0.5 * math.log(sigma2) - rate * sigma2)


def log_prior_mu(mu: float, priors: Priors) -> float:
    return (-0.5 * math.log(2.0 * math.pi * priors.B_mu)
            - 0.5 * (mu - priors.b_mu) ** 2 / priors.B_mu)


def log_prior(p: Parameters | tuple, priors: Priors) -> float:
    """Joint log prior density at (mu, phi, sigma).

    The sigma component is the Gamma(1/2, 1/(2 B_sigma)) density in sigma^2.
    Accepts a Parameters instance or a plain (mu, phi, sigma) triple so the
    boundary (|phi| >= 1, sigma <= 0, where the result is -inf) is evaluable.
    """
    if isinstance(p, Parameters):
        mu, phi, sigma = p.mu, p.phi, p.sigma
    else:
        mu, phi, sigma = p
    if not abs(phi) < 1.0 or not sigma > 0.0:
        return -math.inf
    return (log_prior_mu(mu, priors) + log_prior_phi(phi, priors)
            + log_prior_sigma2(sigma * sigma, priors))


def transform_path(path: LatentPath, p: Parameters,
                   target: Parameterization) -> LatentPath:
    """Move a latent path between centered and non-centered scales.

    Centered -> non-centered is (h - mu) / sigma; the inverse is
    mu + sigma * h.  A no-op when the path already carries the target tag.
    """
    if not p.sigma > 0.0:
        raise ValueError("sigma must be > 0 to transform the path")
    if path.parameterization == target:
        return path
    if target == Parameterization.NONCENTERED:
        states = (path.states - p.mu) / p.sigma
    else:
        states = p.mu + p.sigma * path.states
    return LatentPath(states, target)


@njit(cache=True, nogil=True)
def _ar1_recurse(eta, mu, phi, sigma, h0):
    n = eta.shape[0]
    out = np.empty(n + 1)
    out[0] = h0
    prev = h0
    for t in range(n):
        prev = mu + phi * (prev - mu) + sigma * eta[t]
        out[t + 1] = prev
    return out


def simulate(p: Parameters, T: int,
             rng: np.random.Generator) -> tuple[np.ndarray, LatentPath]:
    """Simulate T returns and the true latent path.

    h_0 comes from the stationary law N(mu, sigma^2 / (1 - phi^2)); the
    draw order (h_0, then state innovations, then return innovations) is
    fixed so output is a pure function of the generator state.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    stat_sd = p.sigma / math.sqrt(1.0 - p.phi * p.phi)
    h0 = p.mu + stat_sd * rng.standard_normal()
    eta = rng.standard_normal(T)
    eps = rng.standard_normal(T)
    states = _ar1_recurse(eta, p.mu, p.phi, p.sigma, h0)
    y = np.exp(states[1:] / 2.0) * eps
    return y, LatentPath(states, Parameterization.CENTERED)


def linearize(y: np.ndarray, offset_c: float | None = None,
              demean: bool = False) -> Dataset:
    """Build the log-squared observation series log((y - mean)^2 + c).

    Defaults: c = 1e-4 on raw returns, c = 1e-3 when de-meaning (the mean is
    the full-sample arithmetic mean of y).
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 1:
        raise ValueError("y must be a non-empty 1-d array")
    if not np.all(np.isfinite(y)):
        raise ValueError("returns must be finite")
    if offset_c is None:
        offset_c = DEFAULT_OFFSET_DEMEANED if demean else DEFAULT_OFFSET_RAW
    if offset_c < 0.0:
        raise ValueError("offset_c must be >= 0")
    centered = y - y.mean() if demean else y
    squared = centered * centered + offset_c
    if np.any(squared <= 0.0):
        raise ValueError("zero return with offset_c = 0 gives log(0); "
                         "set a positive offset_c")
    return Dataset(y=y, y_tilde=np.log(squared), offset_c=float(offset_c),
                   demeaned=bool(demean))
