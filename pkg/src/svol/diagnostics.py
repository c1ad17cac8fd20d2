"""Sampler-quality diagnostics.

The headline quantity is the inefficiency factor: the integrated
autocorrelation time tau = 1 + 2 sum rho(s), estimated as the spectral
density of the chain at frequency zero over its sample variance.  M draws
with inefficiency factor F carry the information of roughly M / F
independent ones, which is the reported effective sample size.

Also here: the joint-distribution ("getting it right") harness that checks
every transition kernel against the prior-predictive joint by comparing a
direct simulator with a successive-conditional one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .mixture import MixtureTable, default_table
from .model import Priors
from .samplers import _SCHEME_CODE, _table_arrays, SamplerConfig, ChainOutput

__all__ = [
    "DiagnosticError",
    "inefficiency_factor",
    "EfficiencySummary",
    "efficiency_summary",
    "ParameterSummary",
    "PosteriorSummary",
    "summarize",
    "GewekeResult",
    "geweke_test",
    "marginal_joint_stats",
    "GEWEKE_STAT_NAMES",
]

MIN_CHAIN_LEN = 200


class DiagnosticError(ValueError):
    """A diagnostic is undefined for the given chain."""


def _autocovariances(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.size
    xc = x - x.mean()
    g = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        g[k] = xc[:n - k] @ xc[k:] / n
    return g


def _spectrum0_ar(x: np.ndarray) -> float:
    """Spectral density at frequency zero from an AIC-selected AR fit."""
    n = x.size
    order_max = min(n // 10, 50)
    g = _autocovariances(x, order_max)
    if g[0] <= 0.0:
        raise DiagnosticError("chain is constant")

    # Levinson-Durbin recursion, tracking the AIC-best order.
    best_aic = n * math.log(g[0])
    best_v = g[0]
    best_coef_sum = 0.0
    a = np.zeros(order_max + 1)
    v = g[0]
    for k in range(1, order_max + 1):
        acc = g[k]
        for j in range(1, k):
            acc -= a[j] * g[k - j]
        lam = acc / v
        a_new = a.copy()
        a_new[k] = lam
        for j in range(1, k):
            a_new[j] = a[j] - lam * a[k - j]
        a = a_new
        v *= (1.0 - lam * lam)
        if v <= 0.0:
            break
        aic = n * math.log(v) + 2.0 * k
        if aic < best_aic:
            best_aic = aic
            best_v = v
            best_coef_sum = a[1:k + 1].sum()
    denom = (1.0 - best_coef_sum) ** 2
    if denom <= 0.0:
        raise DiagnosticError("AR fit is non-stationary")
    return best_v / denom


def _batch_means_var0(x: np.ndarray) -> float:
    n = x.size
    b = int(math.sqrt(n))
    nb = n // b
    means = x[:nb * b].reshape(nb, b).mean(axis=1)
    return b * means.var(ddof=1)


def inefficiency_factor(chain: np.ndarray, method: str = "ar") -> float:
    """Integrated autocorrelation time of a chain of draws.

    Estimated as spectral density at zero over sample variance; the density
    comes from an AR fit with AIC order selection up to min(len/10, 50)
    (method "ar", default) or from batch means (method "batch").
    """
    x = np.ascontiguousarray(chain, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("chain must be 1-d")
    if x.size < MIN_CHAIN_LEN:
        raise DiagnosticError(
            f"need at least {MIN_CHAIN_LEN} draws, got {x.size}")
    s2 = x.var(ddof=1)
    if not s2 > 0.0:
        raise DiagnosticError("chain is constant; inefficiency undefined")
    if method == "ar":
        gamma0 = _spectrum0_ar(x)
    elif method == "batch":
        gamma0 = _batch_means_var0(x)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(gamma0 / s2)


@dataclass(frozen=True)
class EfficiencySummary:
    """Inefficiency factors and effective sample sizes per parameter."""

    if_mu: float
    if_phi: float
    if_sigma: float
    ess_mu: float
    ess_phi: float
    ess_sigma: float
    M: int

    @classmethod
    def from_factors(cls, if_mu: float, if_phi: float, if_sigma: float,
                     M: int) -> "EfficiencySummary":
        return cls(if_mu=if_mu, if_phi=if_phi, if_sigma=if_sigma,
                   ess_mu=M / if_mu, ess_phi=M / if_phi,
                   ess_sigma=M / if_sigma, M=M)


def efficiency_summary(out: ChainOutput) -> EfficiencySummary:
    return EfficiencySummary.from_factors(
        inefficiency_factor(out.column("mu")),
        inefficiency_factor(out.column("phi")),
        inefficiency_factor(out.column("sigma")),
        out.M)


@dataclass(frozen=True)
class ParameterSummary:
    name: str
    mean: float
    sd: float
    q05: float
    q50: float
    q95: float
    inefficiency: float | None
    ess: float | None


@dataclass(frozen=True)
class PosteriorSummary:
    parameters: tuple[ParameterSummary, ...]
    M: int

    def __getitem__(self, name: str) -> ParameterSummary:
        for p in self.parameters:
            if p.name == name:
                return p
        raise KeyError(name)


def summarize(out: ChainOutput) -> PosteriorSummary:
    """Posterior summary per parameter.

    A failing inefficiency estimate (constant column, or fewer than the
    minimum draws the estimator needs) is reported as undefined without
    touching the other columns.  Note that the inefficiency columns depend
    on the order of the draws (they measure autocorrelation), so permuting
    a chain changes them while leaving the moment columns alone.
    """
    rows = []
    for name in ("mu", "phi", "sigma"):
        x = out.column(name)
        q05, q50, q95 = np.quantile(x, [0.05, 0.5, 0.95])
        try:
            factor = inefficiency_factor(x)
            ess = out.M / factor
        except DiagnosticError:
            factor = None
            ess = None
        rows.append(ParameterSummary(
            name=name, mean=float(x.mean()), sd=float(x.std(ddof=1)),
            q05=float(q05), q50=float(q50), q95=float(q95),
            inefficiency=factor, ess=ess))
    return PosteriorSummary(parameters=tuple(rows), M=out.M)


# ---------------------------------------------------------------------------
# joint-distribution correctness harness

GEWEKE_STAT_NAMES = ("mu", "mu^2", "phi", "phi^2", "sigma^2", "sigma^4",
                     "mean_h", "var_h")

#: Default priors for the harness.  The level prior sits far from zero and
#: the persistence prior reaches toward one, because the initial-state
#: acceptance factor scales like |level| / (1 - persistence): these choices
#: keep the null healthy while making that factor's omission detectable.
GEWEKE_PRIORS = Priors(b_mu=-9.0, B_mu=1.0, a0=8.0, b0=1.2, B_sigma=0.25)


def _prior_draws(priors: Priors, n: int, rng: np.random.Generator):
    mu = priors.b_mu + math.sqrt(priors.B_mu) * rng.standard_normal(n)
    phi = 2.0 * rng.beta(priors.a0, priors.b0, size=n) - 1.0
    sigma = np.sqrt(priors.B_sigma * rng.chisquare(1, size=n))
    return mu, phi, sigma


def marginal_joint_stats(T: int, priors: Priors, n: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Test-function samples under the prior-predictive joint.

    Draws (mu, phi, sigma) from the prior and a latent path from the model,
    and returns the (n, 8) matrix of test functions; the observations never
    enter them, so none are generated here.
    """
    mu, phi, sigma = _prior_draws(priors, n, rng)
    h = mu + sigma / np.sqrt(1.0 - phi * phi) * rng.standard_normal(n)
    sum_h = h.copy()
    sum_h2 = h * h
    for _ in range(T):
        h = mu + phi * (h - mu) + sigma * rng.standard_normal(n)
        sum_h += h
        sum_h2 += h * h
    mean_h = sum_h / (T + 1)
    var_h = sum_h2 / (T + 1) - mean_h ** 2
    stats = np.empty((n, 8))
    stats[:, 0] = mu
    stats[:, 1] = mu * mu
    stats[:, 2] = phi
    stats[:, 3] = phi * phi
    stats[:, 4] = sigma ** 2
    stats[:, 5] = sigma ** 4
    stats[:, 6] = mean_h
    stats[:, 7] = var_h
    return stats


def _successive_joint_stats(scheme: str, blocks: int, T: int, priors: Priors,
                            n: int, rng: np.random.Generator,
                            table: MixtureTable,
                            include_h0: bool) -> np.ndarray:
    """Test-function samples from the successive-conditional simulator:
    alternate one transition of the sampler with a redraw of the linearized
    observations given the current path and indicators."""
    scheme_code = _SCHEME_CODE[scheme]
    centered = scheme_code in (K.SCHEME_C, K.SCHEME_GIS_C)
    log_w, m_k, s2_k, inv2_s2, log_s = _table_arrays(table)

    # Exact draw from the joint as the starting state (stationary start).
    mu, phi, sigma = (float(v[0]) for v in _prior_draws(priors, 1, rng))
    h = np.empty(T + 1)
    h[0] = mu + sigma / math.sqrt(1.0 - phi * phi) * rng.standard_normal()
    for t in range(1, T + 1):
        h[t] = mu + phi * (h[t - 1] - mu) + sigma * rng.standard_normal()
    r = rng.choice(table.n_components, size=T, p=table.weights).astype(np.int64)
    ytilde = h[1:] + m_k[r] + np.sqrt(s2_k[r]) * rng.standard_normal(T)
    if not centered:
        h = (h - mu) / sigma

    gamma_shape = (T - 1) / 2.0 if blocks == 1 else T / 2.0
    has_c_leg = scheme not in ("nc2", "nc3")

    stats = np.empty((n, 8))
    acc = np.zeros(K.ACC_SLOTS, dtype=np.int64)
    chunk = 1024
    done = 0
    while done < n:
        k = min(chunk, n - done)
        normals = rng.standard_normal((k, T + 9))
        uniforms = rng.random((k, T + 6))
        gammas = rng.gamma(gamma_shape, size=k) if has_c_leg else np.ones(k)
        regen_z = rng.standard_normal((k, T))
        fail, mu, phi, sigma = K.geweke_chunk(
            scheme_code, blocks, h, r, mu, phi, sigma,
            ytilde, log_w, m_k, s2_k, inv2_s2, log_s,
            priors.b_mu, priors.B_mu, priors.a0, priors.b0, priors.B_sigma,
            1e12, 1e8, normals, uniforms, gammas, regen_z, include_h0,
            stats[done:done + k], acc)
        if fail >= 0:
            raise DiagnosticError(
                f"successive-conditional chain failed at step {done + fail}")
        done += k
    return stats


@dataclass(frozen=True)
class GewekeResult:
    scheme: str
    n_outer: int
    names: tuple[str, ...]
    z_scores: np.ndarray
    mean_marginal: np.ndarray
    mean_successive: np.ndarray

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z_scores)))

    def passed(self, threshold: float = 4.0) -> bool:
        return bool(np.all(np.abs(self.z_scores) < threshold))


def geweke_test(scheme: str, T: int, priors: Priors | None, n_outer: int,
                rng: np.random.Generator, gis_blocks: int = 2,
                include_h0: bool = True,
                table: MixtureTable | None = None) -> GewekeResult:
    """Getting-it-right check of one scheme's full transition kernel.

    Compares marginal-conditional and successive-conditional samples of
    {mu, mu^2, phi, phi^2, sigma^2, sigma^4, mean(h), var(h)} with
    autocorrelation-adjusted standard errors.  A correct kernel keeps every
    |z| small; ``include_h0=False`` drops the initial-state factor from all
    acceptance ratios, which a sufficiently long run must flag.
    """
    priors = priors or GEWEKE_PRIORS
    table = table or default_table()
    cfg = SamplerConfig(scheme=scheme, draws=1, gis_blocks=gis_blocks)
    blocks = cfg.blocks

    mc = marginal_joint_stats(T, priors, n_outer, rng)
    sc = _successive_joint_stats(scheme, blocks, T, priors, n_outer, rng,
                                 table, include_h0)

    z = np.empty(8)
    for j in range(8):
        se2_mc = mc[:, j].var(ddof=1) / n_outer
        factor = inefficiency_factor(sc[:, j])
        se2_sc = sc[:, j].var(ddof=1) * max(factor, 1e-12) / n_outer
        z[j] = (mc[:, j].mean() - sc[:, j].mean()) / math.sqrt(se2_mc + se2_sc)
    return GewekeResult(scheme=scheme, n_outer=n_outer,
                        names=GEWEKE_STAT_NAMES, z_scores=z,
                        mean_marginal=mc.mean(axis=0),
                        mean_successive=sc.mean(axis=0))
