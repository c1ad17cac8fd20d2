"""Parameter updates and full MCMC loops for every sampling scheme.

Seven schemes are available: the centered sampler with one-, two- or
three-block parameter updates (c1, c2, c3), the noncentered sampler with
joint or separate location/scale draws (nc2, nc3), and the interweaved
samplers that redraw the parameters once under each parameterization per
sweep (gis-c, gis-nc, named by their baseline).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .banded import SymTridiag
from .mixture import MixtureState, MixtureTable, default_table
from .model import (
    Dataset,
    LatentPath,
    Parameterization,
    Parameters,
    Priors,
)

__all__ = [
    "SCHEMES",
    "SamplerConfig",
    "ChainState",
    "ChainOutput",
    "ChainError",
    "build_band_system_C",
    "build_band_system_NC",
    "draw_latent",
    "update_C_oneblock",
    "update_C_twoblock",
    "update_C_threeblock",
    "update_NC",
    "run_chain",
]

SCHEMES = ("c1", "c2", "c3", "nc2", "nc3", "gis-c", "gis-nc")

# Iterations per compiled chunk.  Fixed: the random streams are consumed in
# per-chunk blocks, so this value is part of the reproducibility contract.
CHUNK = 256

_SCHEME_CODE = {
    "c1": K.SCHEME_C, "c2": K.SCHEME_C, "c3": K.SCHEME_C,
    "nc2": K.SCHEME_NC, "nc3": K.SCHEME_NC,
    "gis-c": K.SCHEME_GIS_C, "gis-nc": K.SCHEME_GIS_NC,
}
_SCHEME_BLOCKS = {"c1": 1, "c2": 2, "c3": 3, "nc2": 2, "nc3": 3}


class ChainError(RuntimeError):
    """A sampling step failed; carries the (0-based) global iteration."""

    def __init__(self, iteration: int, reason: str):
        self.iteration = iteration
        super().__init__(f"chain aborted at iteration {iteration}: {reason}")


@dataclass(frozen=True)
class SamplerConfig:
    """Run-length and tuning knobs for one chain."""

    scheme: str = "gis-c"
    draws: int = 20_000
    burnin: int = 2_000
    thin_latent: int = 10
    store_latent: bool = False
    aux_b011: float = 1e12
    aux_b022: float = 1e8
    gis_blocks: int = 2

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; "
                             f"expected one of {SCHEMES}")
        if self.draws < 1 or self.burnin < 0 or self.thin_latent < 1:
            raise ValueError("draws >= 1, burnin >= 0, thin_latent >= 1")
        if not (self.aux_b011 > 0 and self.aux_b022 > 0):
            raise ValueError("auxiliary prior variances must be positive")
        if self.gis_blocks not in (2, 3):
            raise ValueError("gis_blocks must be 2 or 3")

    @property
    def baseline(self) -> Parameterization:
        if self.scheme in ("c1", "c2", "c3", "gis-c"):
            return Parameterization.CENTERED
        return Parameterization.NONCENTERED

    @property
    def blocks(self) -> int:
        return _SCHEME_BLOCKS.get(self.scheme, self.gis_blocks)

    @property
    def is_gis(self) -> bool:
        return self.scheme.startswith("gis")

    @property
    def has_centered_leg(self) -> bool:
        return self.scheme != "nc2" and self.scheme != "nc3"


@dataclass
class ChainState:
    """Mutable sampler state: parameters, path, indicators, generator."""

    params: Parameters
    path: LatentPath
    mix: MixtureState
    rng: np.random.Generator

    @classmethod
    def initial(cls, data: Dataset, priors: Priors, cfg: SamplerConfig,
                rng: np.random.Generator,
                params: Parameters | None = None,
                table: MixtureTable | None = None) -> "ChainState":
        """Default starting point: prior-mean parameters, flat path at the
        level, every indicator on the highest-weight component."""
        table = table or default_table()
        if params is None:
            phi0 = 2.0 * priors.a0 / (priors.a0 + priors.b0) - 1.0
            params = Parameters(mu=priors.b_mu, phi=phi0,
                                sigma=math.sqrt(priors.B_sigma))
        T = data.n_obs
        if cfg.baseline is Parameterization.CENTERED:
            states = np.full(T + 1, params.mu)
        else:
            states = np.zeros(T + 1)
        path = LatentPath(states, cfg.baseline)
        mix = MixtureState(np.full(T, int(np.argmax(table.weights)),
                                   dtype=np.int64))
        return cls(params=params, path=path, mix=mix, rng=rng)


@dataclass
class ChainOutput:
    """Stored draws plus bookkeeping for one chain."""

    draws: np.ndarray                       # (M, 3) columns mu, phi, sigma
    latent_draws: np.ndarray | None         # thinned paths, or None
    accept: dict[str, tuple[int, int]]      # update -> (accepted, proposed)
    warn_count: int
    seconds_per_1000: float
    scheme: str
    burnin: int
    n_obs: int
    latent_thin: int = 1

    @property
    def M(self) -> int:
        return self.draws.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, ("mu", "phi", "sigma").index(name)]


def _table_arrays(table: MixtureTable):
    with np.errstate(divide="ignore"):
        log_w = np.log(table.weights)
    return (log_w, table.means, table.variances,
            0.5 / table.variances, 0.5 * np.log(table.variances))


# ---------------------------------------------------------------------------
# band-system assembly (exposed mainly for oracle tests)


def build_band_system_C(data: Dataset, mix: MixtureState,
                        p: Parameters) -> tuple[SymTridiag, np.ndarray]:
    """Precision matrix and linear term of the centered path conditional."""
    T = data.n_obs
    if T < 2:
        raise ValueError("need at least two observations")
    table = default_table()
    d = np.empty(T)
    e = np.empty(T - 1)
    c = np.empty(T)
    K._build_band_c(data.y_tilde, mix.indicators, table.means,
                    table.variances, p.mu, p.phi, p.sigma ** 2, d, e, c)
    return SymTridiag(d, e), c


def build_band_system_NC(data: Dataset, mix: MixtureState,
                         p: Parameters) -> tuple[SymTridiag, np.ndarray]:
    """Noncentered counterpart of :func:`build_band_system_C`."""
    T = data.n_obs
    if T < 2:
        raise ValueError("need at least two observations")
    table = default_table()
    d = np.empty(T)
    e = np.empty(T - 1)
    c = np.empty(T)
    K._build_band_nc(data.y_tilde, mix.indicators, table.means,
                     table.variances, p.mu, p.phi, p.sigma, d, e, c)
    return SymTridiag(d, e), c


# ---------------------------------------------------------------------------
# single update steps (one-call wrappers over the compiled kernels)


def draw_latent(state: ChainState, data: Dataset,
                table: MixtureTable | None = None) -> LatentPath:
    """Redraw the full latent path in place (states 1..T jointly, then the
    initial state from its conditional)."""
    table = table or default_table()
    T = data.n_obs
    centered = state.path.parameterization is Parameterization.CENTERED
    h = state.path.states.copy()
    eps = state.rng.standard_normal(T)
    z0 = state.rng.standard_normal()
    scratch = [np.empty(T), np.empty(T - 1), np.empty(T),
               np.empty(T), np.empty(T - 1), np.empty(T)]
    p = state.params
    bad = K._draw_latent(centered, h, data.y_tilde, state.mix.indicators,
                         table.means, table.variances, p.mu, p.phi, p.sigma,
                         eps, z0, *scratch)
    if bad >= 0:
        from .banded import NotPositiveDefiniteError
        raise NotPositiveDefiniteError(bad)
    state.path = LatentPath(h, state.path.parameterization)
    return state.path


def _require_centered(state: ChainState):
    if state.path.parameterization is not Parameterization.CENTERED:
        raise ValueError("update requires a centered path")


def _set_params(state: ChainState, mu: float, phi: float, sigma: float):
    state.params = Parameters(mu=mu, phi=phi, sigma=sigma)


def update_C_oneblock(state: ChainState, priors: Priors,
                      cfg: SamplerConfig, include_h0: bool = True) -> dict:
    """Joint MH update of (mu, phi, sigma) under the centered path."""
    _require_centered(state)
    T = state.path.horizon
    z = state.rng.standard_normal(2)
    g = state.rng.gamma((T - 1) / 2.0)
    u = state.rng.random()
    acc = np.zeros(K.ACC_SLOTS, dtype=np.int64)
    p = state.params
    mu, phi, sigma = K._c1_update(
        state.path.states, p.mu, p.phi, p.sigma,
        priors.b_mu, priors.B_mu, priors.a0, priors.b0, priors.B_sigma,
        cfg.aux_b011, cfg.aux_b022, z[0], z[1], g, u, include_h0, acc)
    _set_params(state, mu, phi, sigma)
    return {"joint": bool(acc[0]), "warn": int(acc[5])}


def update_C_twoblock(state: ChainState, priors: Priors,
                      cfg: SamplerConfig, include_h0: bool = True) -> dict:
    """(gamma, phi) block then sigma^2 block, both MH."""
    _require_centered(state)
    T = state.path.horizon
    z = state.rng.standard_normal(2)
    g = state.rng.gamma(T / 2.0)
    u = state.rng.random(2)
    acc = np.zeros(K.ACC_SLOTS, dtype=np.int64)
    p = state.params
    mu, phi, sigma = K._c2_update(
        state.path.states, p.mu, p.phi, p.sigma,
        priors.b_mu, priors.B_mu, priors.a0, priors.b0, priors.B_sigma,
        cfg.aux_b011, cfg.aux_b022, z[0], z[1], g, u[0], u[1],
        include_h0, acc)
    _set_params(state, mu, phi, sigma)
    return {"gamma_phi": bool(acc[0]), "sigma2": bool(acc[1]),
            "warn": int(acc[5])}


def update_C_threeblock(state: ChainState, priors: Priors,
                        cfg: SamplerConfig, include_h0: bool = True) -> dict:
    """Individual sweeps over sigma^2, phi, and the intercept."""
    _require_centered(state)
    T = state.path.horizon
    z = state.rng.standard_normal(2)
    g = state.rng.gamma(T / 2.0)
    u = state.rng.random(3)
    acc = np.zeros(K.ACC_SLOTS, dtype=np.int64)
    p = state.params
    mu, phi, sigma = K._c3_update(
        state.path.states, p.mu, p.phi, p.sigma,
        priors.b_mu, priors.B_mu, priors.a0, priors.b0, priors.B_sigma,
        cfg.aux_b011, cfg.aux_b022, z[0], z[1], g, u[0], u[1], u[2],
        include_h0, acc)
    _set_params(state, mu, phi, sigma)
    return {"sigma2": bool(acc[1]), "phi": bool(acc[2]),
            "gamma": bool(acc[3]), "warn": int(acc[5])}


def update_NC(state: ChainState, priors: Priors, cfg: SamplerConfig,
              blocks: int, data: Dataset,
              table: MixtureTable | None = None,
              include_h0: bool = True) -> dict:
    """phi by MH, then (mu, sigma) by exact Gibbs; sigma is kept positive by
    flipping the path sign together with a negative draw."""
    if state.path.parameterization is not Parameterization.NONCENTERED:
        raise ValueError("update requires a noncentered path")
    if blocks not in (2, 3):
        raise ValueError("blocks must be 2 or 3")
    table = table or default_table()
    zph = state.rng.standard_normal()
    z = state.rng.standard_normal(2)
    u = state.rng.random()
    acc = np.zeros(K.ACC_SLOTS, dtype=np.int64)
    h = state.path.states.copy()
    p = state.params
    ok, mu, phi, sigma = K._nc_param_update(
        blocks, h, data.y_tilde, state.mix.indicators, table.means,
        table.variances, p.mu, p.phi, p.sigma,
        priors.b_mu, priors.B_mu, priors.a0, priors.b0, priors.B_sigma,
        zph, z[0], z[1], u, include_h0, acc)
    if not ok:
        raise ChainError(0, "singular noncentered regression")
    state.path = LatentPath(h, state.path.parameterization)
    _set_params(state, mu, phi, sigma)
    return {"phi": bool(acc[4]), "warn": int(acc[5])}


# ---------------------------------------------------------------------------
# full chain


def _accept_dict(scheme: str, blocks: int, acc: np.ndarray,
                 n: int) -> dict[str, tuple[int, int]]:
    out: dict[str, tuple[int, int]] = {}
    if scheme == "c1":
        out["joint"] = (int(acc[0]), n)
    if scheme == "c2" or (scheme.startswith("gis") and blocks == 2):
        out["gamma_phi"] = (int(acc[0]), n)
        out["sigma2"] = (int(acc[1]), n)
    if scheme == "c3" or (scheme.startswith("gis") and blocks == 3):
        out["sigma2"] = (int(acc[1]), n)
        out["phi_c"] = (int(acc[2]), n)
        out["gamma"] = (int(acc[3]), n)
    if scheme in ("nc2", "nc3") or scheme.startswith("gis"):
        out["phi_nc"] = (int(acc[4]), n)
    return out


def run_chain(data: Dataset, priors: Priors, cfg: SamplerConfig,
              init: ChainState,
              table: MixtureTable | None = None) -> ChainOutput:
    """Run burn-in plus ``cfg.draws`` stored sweeps of the configured scheme.

    The output is a pure function of (data, priors, cfg, initial state,
    generator state); any numerical failure aborts with the global
    iteration index attached.
    """
    table = table or default_table()
    T = data.n_obs
    if T < 2:
        raise ValueError("need at least two observations")
    if init.path.parameterization is not cfg.baseline:
        raise ValueError(f"initial path must be {cfg.baseline} "
                         f"for scheme {cfg.scheme!r}")
    if init.path.horizon != T or init.mix.indicators.size != T:
        raise ValueError("initial state does not match the data length")

    scheme_code = _SCHEME_CODE[cfg.scheme]
    blocks = cfg.blocks
    gamma_shape = ((T - 1) / 2.0 if blocks == 1 else T / 2.0)

    h = init.path.states.copy()
    r = init.mix.indicators.copy()
    mu, phi, sigma = init.params.mu, init.params.phi, init.params.sigma
    rng = init.rng

    log_w, m_k, s2_k, inv2_s2, log_s = _table_arrays(table)
    acc = np.zeros(K.ACC_SLOTS, dtype=np.int64)

    n_latent_rows = 0
    latent = np.empty((0, T + 1))
    if cfg.store_latent:
        n_latent_rows = (cfg.draws + cfg.thin_latent - 1) // cfg.thin_latent
        latent = np.empty((n_latent_rows, T + 1))

    draws = np.empty((cfg.draws, 3))
    scratch_draws = np.empty((CHUNK, 3))
    no_latent = np.empty((0, T + 1))

    t0 = time.perf_counter()

    def run_span(n_total: int, stored: bool):
        nonlocal mu, phi, sigma
        done = 0
        while done < n_total:
            k = min(CHUNK, n_total - done)
            normals = rng.standard_normal((k, T + 9))
            uniforms = rng.random((k, T + 6))
            if cfg.has_centered_leg:
                gammas = rng.gamma(gamma_shape, size=k)
            else:
                gammas = np.ones(k)
            if stored:
                out = draws[done:done + k]
            else:
                out = scratch_draws[:k]
            fail, mu, phi, sigma = K.run_chunk(
                scheme_code, blocks, h, r, mu, phi, sigma,
                data.y_tilde, log_w, m_k, s2_k, inv2_s2, log_s,
                priors.b_mu, priors.B_mu, priors.a0, priors.b0,
                priors.B_sigma, cfg.aux_b011, cfg.aux_b022,
                normals, uniforms, gammas, True,
                out, latent if (stored and cfg.store_latent) else no_latent,
                cfg.thin_latent, done if stored else 0,
                stored and cfg.store_latent, acc)
            if fail >= 0:
                offset = cfg.burnin if stored else 0
                raise ChainError(
                    offset + done + fail,
                    "non-positive Cholesky pivot or singular regression")
            done += k

    run_span(cfg.burnin, stored=False)
    run_span(cfg.draws, stored=True)

    elapsed = time.perf_counter() - t0
    per_1000 = 1000.0 * elapsed / (cfg.burnin + cfg.draws)

    init.path = LatentPath(h, cfg.baseline)
    init.mix = MixtureState(r)
    init.params = Parameters(mu=mu, phi=phi, sigma=sigma)

    return ChainOutput(
        draws=draws,
        latent_draws=latent if cfg.store_latent else None,
        accept=_accept_dict(cfg.scheme, blocks, acc, cfg.burnin + cfg.draws),
        warn_count=int(acc[5]),
        seconds_per_1000=per_1000,
        scheme=cfg.scheme,
        burnin=cfg.burnin,
        n_obs=T,
        latent_thin=cfg.thin_latent,
    )
