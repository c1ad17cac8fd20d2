"""Compiled hot path shared by every sampling scheme.

All functions are numba-compiled and take their random inputs explicitly
(pre-drawn standard normals, uniforms, and unit-scale gamma variates), which
keeps them pure: one iteration is a deterministic function of (state,
randoms).  The chunk runner loops iterations entirely inside compiled code;
Python only refills the random blocks.

Random slot layout per iteration, shared by all schemes:

    normals row  (T + 9): [0:T] path noise | [T] initial state |
                          [T+1:T+5] centered-leg z | [T+5:T+9] noncentered z
    uniforms row (T + 6): [0:T] indicators | [T:T+3] centered-leg accepts |
                          [T+3] noncentered phi accept | rest spare
    gamma row    (1,):    centered-leg variance proposal (unit scale)

Acceptance counter slots: 0 joint/(gamma,phi), 1 sigma^2, 2 phi (3-block),
3 gamma (3-block), 4 noncentered phi, 5 degenerate-proposal warnings.
"""

import math

import numpy as np
from numba import njit

from .banded import _awol_given_noise, _chol_tridiag

LOG_2PI = math.log(2.0 * math.pi)

# Scheme codes for the chunk runner.
SCHEME_C = 0
SCHEME_NC = 1
SCHEME_GIS_C = 2
SCHEME_GIS_NC = 3

ACC_SLOTS = 8


# ---------------------------------------------------------------------------
# log densities


@njit(cache=True, nogil=True)
def _log_normal(x, mean, var):
    return -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


@njit(cache=True, nogil=True)
def _log_prior_phi(phi, a0, b0):
    if not abs(phi) < 1.0:
        return -np.inf
    lbeta = math.lgamma(a0) + math.lgamma(b0) - math.lgamma(a0 + b0)
    return (-math.log(2.0) - lbeta
            + ((a0 - 1.0) * np.log((1.0 + phi) / 2.0)
               + (b0 - 1.0) * np.log((1.0 - phi) / 2.0)))


@njit(cache=True, nogil=True)
def _log_prior_sigma2(sigma2, B_sigma):
    if not sigma2 > 0.0:
        return -np.inf
    rate = 0.5 / B_sigma
    return (0.5 * np.log(rate) - math.lgamma(0.5)
            - 0.5 * np.log(sigma2) - rate * sigma2)


@njit(cache=True, nogil=True)
def _log_h0_centered(h0, gamma, phi, sigma2):
    """Stationary-law density of the pre-sample state, mu = gamma/(1-phi)."""
    mu = gamma / (1.0 - phi)
    var = sigma2 / (1.0 - phi * phi)
    return _log_normal(h0, mu, var)


@njit(cache=True, nogil=True)
def _log_gamma_given_phi(gamma, phi, b_mu, B_mu):
    """Prior on the intercept implied by mu ~ N(b_mu, B_mu) at fixed phi."""
    scale = 1.0 - phi
    return _log_normal(gamma, b_mu * scale, B_mu * scale * scale)


# ---------------------------------------------------------------------------
# acceptance ratios (pure; antisymmetric under old/new swap by construction)


@njit(cache=True, nogil=True)
def _c_joint_log_accept(g_n, phi_n, s2_n, g_o, phi_o, s2_o, h0,
                        b_mu, B_mu, a0, b0, B_sigma, b011, b022, include_h0):
    """One-block update: real posterior factors over auxiliary ones."""
    if not (abs(phi_n) < 1.0 and s2_n > 0.0):
        return -np.inf

    def side(g, phi, s2):
        val = (_log_gamma_given_phi(g, phi, b_mu, B_mu)
               + _log_prior_phi(phi, a0, b0)
               + _log_prior_sigma2(s2, B_sigma)
               - _log_normal(g, 0.0, s2 * b011)
               - _log_normal(phi, 0.0, s2 * b022)
               + 0.5 * np.log(s2))
        if include_h0:
            val += _log_h0_centered(h0, g, phi, s2)
        return val

    return side(g_n, phi_n, s2_n) - side(g_o, phi_o, s2_o)


@njit(cache=True, nogil=True)
def _c_gamma_phi_log_accept(g_n, phi_n, g_o, phi_o, sigma2, h0,
                            b_mu, B_mu, a0, b0, b011, b022, include_h0):
    if not abs(phi_n) < 1.0:
        return -np.inf

    def side(g, phi):
        val = (_log_gamma_given_phi(g, phi, b_mu, B_mu)
               + _log_prior_phi(phi, a0, b0)
               - _log_normal(g, 0.0, sigma2 * b011)
               - _log_normal(phi, 0.0, sigma2 * b022))
        if include_h0:
            val += _log_h0_centered(h0, g, phi, sigma2)
        return val

    return side(g_n, phi_n) - side(g_o, phi_o)


@njit(cache=True, nogil=True)
def _c_sigma2_log_accept(s2_n, s2_o, B_sigma):
    if not s2_n > 0.0:
        return -np.inf
    return (s2_o - s2_n) / (2.0 * B_sigma)


@njit(cache=True, nogil=True)
def _c_phi_log_accept(phi_n, phi_o, gamma, sigma2, h0,
                      b_mu, B_mu, a0, b0, b022, include_h0):
    """Three-block phi step at fixed intercept and variance.

    Includes the conditional intercept prior, which shifts with phi; the
    joint-distribution test fails without it.
    """
    if not abs(phi_n) < 1.0:
        return -np.inf

    def side(phi):
        val = (_log_prior_phi(phi, a0, b0)
               + _log_gamma_given_phi(gamma, phi, b_mu, B_mu)
               - _log_normal(phi, 0.0, sigma2 * b022))
        if include_h0:
            val += _log_h0_centered(h0, gamma, phi, sigma2)
        return val

    return side(phi_n) - side(phi_o)


@njit(cache=True, nogil=True)
def _c_gamma_log_accept(g_n, g_o, phi, sigma2, h0,
                        b_mu, B_mu, b011, include_h0):
    def side(g):
        val = (_log_gamma_given_phi(g, phi, b_mu, B_mu)
               - _log_normal(g, 0.0, sigma2 * b011))
        if include_h0:
            val += _log_h0_centered(h0, g, phi, sigma2)
        return val

    return side(g_n) - side(g_o)


@njit(cache=True, nogil=True)
def _nc_phi_log_accept(phi_n, phi_o, h0t, a0, b0, include_h0):
    if not abs(phi_n) < 1.0:
        return -np.inf

    def side(phi):
        val = _log_prior_phi(phi, a0, b0)
        if include_h0:
            val += _log_normal(h0t, 0.0, 1.0 / (1.0 - phi * phi))
        return val

    return side(phi_n) - side(phi_o)


# ---------------------------------------------------------------------------
# band systems and latent draws


@njit(cache=True, nogil=True)
def _build_band_c(ytilde, r, m_k, s2_k, mu, phi, sigma2,
                  out_d, out_e, out_c):
    T = ytilde.shape[0]
    inv_s2 = 1.0 / sigma2
    phi_inv_s2 = phi * inv_s2
    one_minus = 1.0 - phi
    interior_prior = mu * one_minus * one_minus * inv_s2
    edge_prior = mu * one_minus * inv_s2
    for t in range(T):
        obs_prec = 1.0 / s2_k[r[t]]
        if t == 0 or t == T - 1:
            out_d[t] = obs_prec + inv_s2
            out_c[t] = obs_prec * (ytilde[t] - m_k[r[t]]) + edge_prior
        else:
            out_d[t] = obs_prec + (1.0 + phi * phi) * inv_s2
            out_c[t] = obs_prec * (ytilde[t] - m_k[r[t]]) + interior_prior
    for t in range(T - 1):
        out_e[t] = -phi_inv_s2


@njit(cache=True, nogil=True)
def _build_band_nc(ytilde, r, m_k, s2_k, mu, phi, sigma,
                   out_d, out_e, out_c):
    T = ytilde.shape[0]
    sigma2 = sigma * sigma
    for t in range(T):
        w = 1.0 / s2_k[r[t]]
        if t == 0 or t == T - 1:
            out_d[t] = sigma2 * w + 1.0
        else:
            out_d[t] = sigma2 * w + 1.0 + phi * phi
        out_c[t] = sigma * w * (ytilde[t] - m_k[r[t]] - mu)
    for t in range(T - 1):
        out_e[t] = -phi


@njit(cache=True, nogil=True)
def _draw_latent(centered, h, ytilde, r, m_k, s2_k, mu, phi, sigma,
                 eps, z0, d, e, c, ld, le, work):
    """Replace h[1:] with one joint draw and h[0] with its conditional.

    Returns -1 on success, else the failing Cholesky pivot index.
    """
    if centered:
        _build_band_c(ytilde, r, m_k, s2_k, mu, phi, sigma * sigma, d, e, c)
    else:
        _build_band_nc(ytilde, r, m_k, s2_k, mu, phi, sigma, d, e, c)
    bad = _chol_tridiag(d, e, ld, le)
    if bad >= 0:
        return bad
    _awol_given_noise(ld, le, c, eps, work, h[1:])
    if centered:
        h[0] = mu + phi * (h[1] - mu) + sigma * z0
    else:
        h[0] = phi * h[1] + z0
    return -1


@njit(cache=True, nogil=True)
def _sample_indicators_c(h, ytilde, log_w, m_k, inv2_s2, log_s, u, r, tmp):
    T = ytilde.shape[0]
    K = m_k.shape[0]
    for t in range(T):
        resid = ytilde[t] - h[t + 1]
        best = -np.inf
        for j in range(K):
            d = resid - m_k[j]
            lw = log_w[j] - log_s[j] - d * d * inv2_s2[j]
            tmp[j] = lw
            if lw > best:
                best = lw
        total = 0.0
        for j in range(K):
            p = np.exp(tmp[j] - best)
            tmp[j] = p
            total += p
        acc = 0.0
        pick = K - 1
        thresh = u[t] * total
        for j in range(K):
            acc += tmp[j]
            if thresh <= acc:
                pick = j
                break
        r[t] = pick


@njit(cache=True, nogil=True)
def _sample_indicators_nc(h, ytilde, mu, sigma, log_w, m_k, inv2_s2, log_s,
                          u, r, tmp):
    T = ytilde.shape[0]
    K = m_k.shape[0]
    for t in range(T):
        resid = ytilde[t] - mu - sigma * h[t + 1]
        best = -np.inf
        for j in range(K):
            d = resid - m_k[j]
            lw = log_w[j] - log_s[j] - d * d * inv2_s2[j]
            tmp[j] = lw
            if lw > best:
                best = lw
        total = 0.0
        for j in range(K):
            p = np.exp(tmp[j] - best)
            tmp[j] = p
            total += p
        acc = 0.0
        pick = K - 1
        thresh = u[t] * total
        for j in range(K):
            acc += tmp[j]
            if thresh <= acc:
                pick = j
                break
        r[t] = pick


# ---------------------------------------------------------------------------
# centered-parameterization parameter updates


@njit(cache=True, nogil=True)
def _c_path_sums(h):
    """Sufficient statistics of the lagged regression over the full path."""
    T = h.shape[0] - 1
    sx1 = 0.0
    sx2 = 0.0
    sy = 0.0
    sxy = 0.0
    syy = 0.0
    for t in range(T):
        lag = h[t]
        cur = h[t + 1]
        sx1 += lag
        sx2 += lag * lag
        sy += cur
        sxy += lag * cur
        syy += cur * cur
    return sx1, sx2, sy, sxy, syy


@njit(cache=True, nogil=True)
def _regression_posterior(T, sx1, sx2, sy, sxy, b011, b022):
    """Mean and covariance factor of the auxiliary (gamma, phi) posterior.

    Returns (ok, b_gamma, b_phi, l11, l21, l22) with L the Cholesky factor
    of B_T = (X'X + B0^{-1})^{-1}.
    """
    a11 = T + 1.0 / b011
    a12 = sx1
    a22 = sx2 + 1.0 / b022
    det = a11 * a22 - a12 * a12
    if not (det > 0.0 and np.isfinite(det)):
        return False, 0.0, 0.0, 0.0, 0.0, 0.0
    bg11 = a22 / det
    bg12 = -a12 / det
    bg22 = a11 / det
    b_gamma = bg11 * sy + bg12 * sxy
    b_phi = bg12 * sy + bg22 * sxy
    if not bg11 > 0.0:
        return False, 0.0, 0.0, 0.0, 0.0, 0.0
    l11 = np.sqrt(bg11)
    l21 = bg12 / l11
    rest = bg22 - l21 * l21
    if not rest > 0.0:
        return False, 0.0, 0.0, 0.0, 0.0, 0.0
    return True, b_gamma, b_phi, l11, l21, np.sqrt(rest)


@njit(cache=True, nogil=True)
def _c_ssr(h, mu, phi):
    """Sum of squared state-equation residuals plus the stationary h0 term."""
    T = h.shape[0] - 1
    ssr = (h[0] - mu) ** 2 * (1.0 - phi * phi)
    for t in range(1, T + 1):
        d = (h[t] - mu) - phi * (h[t - 1] - mu)
        ssr += d * d
    return ssr


@njit(cache=True, nogil=True)
def _c1_update(h, mu, phi, sigma, b_mu, B_mu, a0, b0, B_sigma, b011, b022,
               z1, z2, g1, u1, include_h0, acc):
    """Joint MH update of all three parameters from the auxiliary posterior."""
    T = h.shape[0] - 1
    sx1, sx2, sy, sxy, syy = _c_path_sums(h)
    ok, b_gamma, b_phi, l11, l21, l22 = _regression_posterior(
        T, sx1, sx2, sy, sxy, b011, b022)
    if not ok:
        acc[5] += 1
        return mu, phi, sigma
    c_cap = 0.5 * (syy - (b_gamma * sy + b_phi * sxy))
    if not c_cap > 0.0:
        acc[5] += 1
        return mu, phi, sigma
    s2_n = c_cap / g1
    sig_n = np.sqrt(s2_n)
    g_n = b_gamma + sig_n * l11 * z1
    phi_n = b_phi + sig_n * (l21 * z1 + l22 * z2)

    g_o = (1.0 - phi) * mu
    s2_o = sigma * sigma
    log_r = _c_joint_log_accept(g_n, phi_n, s2_n, g_o, phi, s2_o, h[0],
                                b_mu, B_mu, a0, b0, B_sigma, b011, b022,
                                include_h0)
    if np.log(u1) < log_r:
        acc[0] += 1
        return g_n / (1.0 - phi_n), phi_n, sig_n
    return mu, phi, sigma


@njit(cache=True, nogil=True)
def _c2_update(h, mu, phi, sigma, b_mu, B_mu, a0, b0, B_sigma, b011, b022,
               z1, z2, g1, u1, u2, include_h0, acc):
    """Two blocks: (gamma, phi) given sigma^2, then sigma^2 given the rest."""
    T = h.shape[0] - 1
    sx1, sx2, sy, sxy, syy = _c_path_sums(h)
    ok, b_gamma, b_phi, l11, l21, l22 = _regression_posterior(
        T, sx1, sx2, sy, sxy, b011, b022)
    if ok:
        g_n = b_gamma + sigma * l11 * z1
        phi_n = b_phi + sigma * (l21 * z1 + l22 * z2)
        g_o = (1.0 - phi) * mu
        log_r = _c_gamma_phi_log_accept(g_n, phi_n, g_o, phi, sigma * sigma,
                                        h[0], b_mu, B_mu, a0, b0, b011, b022,
                                        include_h0)
        if np.log(u1) < log_r:
            acc[0] += 1
            mu = g_n / (1.0 - phi_n)
            phi = phi_n
    else:
        acc[5] += 1

    c_cap = 0.5 * _c_ssr(h, mu, phi)
    if not c_cap > 0.0:
        acc[5] += 1
        return mu, phi, sigma
    s2_n = c_cap / g1
    if np.log(u2) < _c_sigma2_log_accept(s2_n, sigma * sigma, B_sigma):
        acc[1] += 1
        sigma = np.sqrt(s2_n)
    return mu, phi, sigma


@njit(cache=True, nogil=True)
def _c3_update(h, mu, phi, sigma, b_mu, B_mu, a0, b0, B_sigma, b011, b022,
               z1, z2, g1, u1, u2, u3, include_h0, acc):
    """Single-parameter sweeps: sigma^2, then phi, then the intercept."""
    T = h.shape[0] - 1
    sx1, sx2, sy, sxy, syy = _c_path_sums(h)

    c_cap = 0.5 * _c_ssr(h, mu, phi)
    if c_cap > 0.0:
        s2_n = c_cap / g1
        if np.log(u1) < _c_sigma2_log_accept(s2_n, sigma * sigma, B_sigma):
            acc[1] += 1
            sigma = np.sqrt(s2_n)
    else:
        acc[5] += 1

    sigma2 = sigma * sigma
    gamma = (1.0 - phi) * mu

    denom = sx2 + 1.0 / b022
    phi_n = (sxy - gamma * sx1) / denom + np.sqrt(sigma2 / denom) * z1
    log_r = _c_phi_log_accept(phi_n, phi, gamma, sigma2, h[0],
                              b_mu, B_mu, a0, b0, b022, include_h0)
    if np.log(u2) < log_r:
        acc[2] += 1
        phi = phi_n
        mu = gamma / (1.0 - phi)

    denom = T + 1.0 / b011
    g_n = (sy - phi * sx1) / denom + np.sqrt(sigma2 / denom) * z2
    log_r = _c_gamma_log_accept(g_n, gamma, phi, sigma2, h[0],
                                b_mu, B_mu, b011, include_h0)
    if np.log(u3) < log_r:
        acc[3] += 1
        mu = g_n / (1.0 - phi)

    return mu, phi, sigma


# ---------------------------------------------------------------------------
# noncentered-parameterization parameter updates


@njit(cache=True, nogil=True)
def _nc_phi_update(h, phi, a0, b0, z1, u1, include_h0, acc):
    """MH step for the persistence from the standardized path."""
    T = h.shape[0] - 1
    sxx = 0.0
    sxy = 0.0
    for t in range(T):
        sxx += h[t] * h[t]
        sxy += h[t] * h[t + 1]
    if not sxx > 0.0:
        acc[5] += 1
        return phi
    phi_n = sxy / sxx + z1 / np.sqrt(sxx)
    log_r = _nc_phi_log_accept(phi_n, phi, h[0], a0, b0, include_h0)
    if np.log(u1) < log_r:
        acc[4] += 1
        return phi_n
    return phi


@njit(cache=True, nogil=True)
def _nc_obs_sums(h, ytilde, r, m_k, s2_k):
    """Weighted regression sums of the linearized observation equation."""
    T = ytilde.shape[0]
    sw = 0.0      # sum 1/s^2
    swh = 0.0     # sum h~ / s^2
    swh2 = 0.0    # sum h~^2 / s^2
    swy = 0.0     # sum (y~ - m) / s^2
    swhy = 0.0    # sum h~ (y~ - m) / s^2
    for t in range(T):
        w = 1.0 / s2_k[r[t]]
        resid = ytilde[t] - m_k[r[t]]
        ht = h[t + 1]
        sw += w
        swh += ht * w
        swh2 += ht * ht * w
        swy += resid * w
        swhy += ht * resid * w
    return sw, swh, swh2, swy, swhy


@njit(cache=True, nogil=True)
def _nc_musig_joint(h, ytilde, r, m_k, s2_k, b_mu, B_mu, B_sigma, z1, z2):
    """Exact joint Gibbs draw of (mu, sigma); sigma may come back negative.

    Returns (ok, mu, sigma_raw).
    """
    sw, swh, swh2, swy, swhy = _nc_obs_sums(h, ytilde, r, m_k, s2_k)
    a11 = sw + 1.0 / B_mu
    a12 = swh
    a22 = swh2 + 1.0 / B_sigma
    det = a11 * a22 - a12 * a12
    if not (det > 0.0 and np.isfinite(det)):
        return False, 0.0, 0.0
    c11 = a22 / det
    c12 = -a12 / det
    c22 = a11 / det
    rhs1 = swy + b_mu / B_mu
    rhs2 = swhy
    mean_mu = c11 * rhs1 + c12 * rhs2
    mean_sig = c12 * rhs1 + c22 * rhs2
    l11 = np.sqrt(c11)
    l21 = c12 / l11
    rest = c22 - l21 * l21
    if not rest > 0.0:
        return False, 0.0, 0.0
    l22 = np.sqrt(rest)
    mu = mean_mu + l11 * z1
    sigma_raw = mean_sig + l21 * z1 + l22 * z2
    return True, mu, sigma_raw


@njit(cache=True, nogil=True)
def _nc_musig_separate(h, ytilde, r, m_k, s2_k, mu, sigma,
                       b_mu, B_mu, B_sigma, z1, z2):
    """Full-conditional Gibbs draws, mu first then sigma."""
    sw, swh, swh2, swy, swhy = _nc_obs_sums(h, ytilde, r, m_k, s2_k)
    var_mu = 1.0 / (sw + 1.0 / B_mu)
    mean_mu = var_mu * ((swy - sigma * swh) + b_mu / B_mu)
    mu = mean_mu + np.sqrt(var_mu) * z1
    var_sig = 1.0 / (swh2 + 1.0 / B_sigma)
    mean_sig = var_sig * (swhy - mu * swh)
    sigma_raw = mean_sig + np.sqrt(var_sig) * z2
    return mu, sigma_raw


@njit(cache=True, nogil=True)
def _nc_param_update(blocks, h, ytilde, r, m_k, s2_k,
                     mu, phi, sigma, b_mu, B_mu, a0, b0, B_sigma,
                     zph, z1, z2, u1, include_h0, acc):
    """Full noncentered parameter sweep; flips the path sign with sigma.

    Returns (ok, mu, phi, sigma).
    """
    phi = _nc_phi_update(h, phi, a0, b0, zph, u1, include_h0, acc)
    if blocks == 2:
        ok, mu, sigma_raw = _nc_musig_joint(h, ytilde, r, m_k, s2_k,
                                            b_mu, B_mu, B_sigma, z1, z2)
        if not ok:
            return False, mu, phi, sigma
    else:
        mu, sigma_raw = _nc_musig_separate(h, ytilde, r, m_k, s2_k, mu,
                                           sigma, b_mu, B_mu, B_sigma,
                                           z1, z2)
    if sigma_raw < 0.0:
        sigma_raw = -sigma_raw
        for t in range(h.shape[0]):
            h[t] = -h[t]
    if sigma_raw == 0.0:
        return False, mu, phi, sigma
    return True, mu, phi, sigma_raw


# ---------------------------------------------------------------------------
# full iterations


@njit(cache=True, nogil=True)
def _c_param_update(blocks, h, mu, phi, sigma,
                    b_mu, B_mu, a0, b0, B_sigma, b011, b022,
                    zc, g1, uc, include_h0, acc):
    if blocks == 1:
        return _c1_update(h, mu, phi, sigma, b_mu, B_mu, a0, b0, B_sigma,
                          b011, b022, zc[0], zc[1], g1, uc[0], include_h0,
                          acc)
    if blocks == 2:
        return _c2_update(h, mu, phi, sigma, b_mu, B_mu, a0, b0, B_sigma,
                          b011, b022, zc[0], zc[1], g1, uc[0], uc[1],
                          include_h0, acc)
    return _c3_update(h, mu, phi, sigma, b_mu, B_mu, a0, b0, B_sigma,
                      b011, b022, zc[0], zc[1], g1, uc[0], uc[1], uc[2],
                      include_h0, acc)


@njit(cache=True, nogil=True)
def _iterate(scheme, blocks, h, r, mu, phi, sigma,
             ytilde, log_w, m_k, s2_k, inv2_s2, log_s,
             b_mu, B_mu, a0, b0, B_sigma, b011, b022,
             normals, uniforms, g1, include_h0,
             d, e, c, ld, le, work, ht, tmp, acc):
    """One full sweep of the requested scheme.  Returns (status, mu, phi,
    sigma); status is -1 on success, else the failing pivot index."""
    T = ytilde.shape[0]
    eps = normals[:T]
    z0 = normals[T]
    zc = normals[T + 1:T + 5]
    znc = normals[T + 5:T + 9]
    u_ind = uniforms[:T]
    uc = uniforms[T:T + 3]
    u_nc = uniforms[T + 3]

    centered_baseline = scheme == SCHEME_C or scheme == SCHEME_GIS_C

    bad = _draw_latent(centered_baseline, h, ytilde, r, m_k, s2_k,
                       mu, phi, sigma, eps, z0, d, e, c, ld, le, work)
    if bad >= 0:
        return bad, mu, phi, sigma

    if scheme == SCHEME_C:
        mu, phi, sigma = _c_param_update(blocks, h, mu, phi, sigma,
                                         b_mu, B_mu, a0, b0, B_sigma,
                                         b011, b022, zc, g1, uc,
                                         include_h0, acc)
    elif scheme == SCHEME_NC:
        ok, mu, phi, sigma = _nc_param_update(blocks, h, ytilde, r, m_k,
                                              s2_k, mu, phi, sigma, b_mu,
                                              B_mu, a0, b0, B_sigma,
                                              znc[0], znc[1], znc[2], u_nc,
                                              include_h0, acc)
        if not ok:
            return T + 1, mu, phi, sigma
    elif scheme == SCHEME_GIS_C:
        mu, phi, sigma = _c_param_update(blocks, h, mu, phi, sigma,
                                         b_mu, B_mu, a0, b0, B_sigma,
                                         b011, b022, zc, g1, uc,
                                         include_h0, acc)
        for t in range(T + 1):
            ht[t] = (h[t] - mu) / sigma
        ok, mu, phi, sigma = _nc_param_update(blocks, ht, ytilde, r, m_k,
                                              s2_k, mu, phi, sigma, b_mu,
                                              B_mu, a0, b0, B_sigma,
                                              znc[0], znc[1], znc[2], u_nc,
                                              include_h0, acc)
        if not ok:
            return T + 1, mu, phi, sigma
        for t in range(T + 1):
            h[t] = mu + sigma * ht[t]
    else:  # SCHEME_GIS_NC
        ok, mu, phi, sigma = _nc_param_update(blocks, h, ytilde, r, m_k,
                                              s2_k, mu, phi, sigma, b_mu,
                                              B_mu, a0, b0, B_sigma,
                                              znc[0], znc[1], znc[2], u_nc,
                                              include_h0, acc)
        if not ok:
            return T + 1, mu, phi, sigma
        for t in range(T + 1):
            ht[t] = mu + sigma * h[t]
        mu, phi, sigma = _c_param_update(blocks, ht, mu, phi, sigma,
                                         b_mu, B_mu, a0, b0, B_sigma,
                                         b011, b022, zc, g1, uc,
                                         include_h0, acc)
        for t in range(T + 1):
            h[t] = (ht[t] - mu) / sigma

    if centered_baseline:
        _sample_indicators_c(h, ytilde, log_w, m_k, inv2_s2, log_s,
                             u_ind, r, tmp)
    else:
        _sample_indicators_nc(h, ytilde, mu, sigma, log_w, m_k, inv2_s2,
                              log_s, u_ind, r, tmp)
    return -1, mu, phi, sigma


@njit(cache=True, nogil=True)
def run_chunk(scheme, blocks, h, r, mu, phi, sigma,
              ytilde, log_w, m_k, s2_k, inv2_s2, log_s,
              b_mu, B_mu, a0, b0, B_sigma, b011, b022,
              normals, uniforms, gammas, include_h0,
              out_draws, out_latent, thin, stored0, store_latent, acc):
    """Run a block of iterations fully inside compiled code.

    Returns (fail_iter, mu, phi, sigma); fail_iter is -1 when the whole
    chunk succeeded, else the chunk-local index of the failing iteration.
    """
    T = ytilde.shape[0]
    n_iter = normals.shape[0]
    d = np.empty(T)
    e = np.empty(T - 1)
    c = np.empty(T)
    ld = np.empty(T)
    le = np.empty(T - 1)
    work = np.empty(T)
    ht = np.empty(T + 1)
    tmp = np.empty(m_k.shape[0])

    for i in range(n_iter):
        status, mu, phi, sigma = _iterate(
            scheme, blocks, h, r, mu, phi, sigma,
            ytilde, log_w, m_k, s2_k, inv2_s2, log_s,
            b_mu, B_mu, a0, b0, B_sigma, b011, b022,
            normals[i], uniforms[i], gammas[i], include_h0,
            d, e, c, ld, le, work, ht, tmp, acc)
        if status >= 0:
            return i, mu, phi, sigma
        out_draws[i, 0] = mu
        out_draws[i, 1] = phi
        out_draws[i, 2] = sigma
        if store_latent:
            k = stored0 + i
            if k % thin == 0:
                row = k // thin
                for t in range(T + 1):
                    out_latent[row, t] = h[t]
    return -1, mu, phi, sigma


@njit(cache=True, nogil=True)
def geweke_chunk(scheme, blocks, h, r, mu, phi, sigma,
                 ytilde, log_w, m_k, s2_k, inv2_s2, log_s,
                 b_mu, B_mu, a0, b0, B_sigma, b011, b022,
                 normals, uniforms, gammas, regen_z, include_h0,
                 out_stats, acc):
    """Successive-conditional simulator: sweep, then refresh the data.

    After each transition the linearized observations are redrawn from
    their conditional law given the current path and indicators, and the
    test functions (mu, mu^2, phi, phi^2, sigma^2, sigma^4, mean h, var h,
    on the centered scale) are recorded.
    """
    T = ytilde.shape[0]
    n_iter = normals.shape[0]
    d = np.empty(T)
    e = np.empty(T - 1)
    c = np.empty(T)
    ld = np.empty(T)
    le = np.empty(T - 1)
    work = np.empty(T)
    ht = np.empty(T + 1)
    tmp = np.empty(m_k.shape[0])
    centered_baseline = scheme == SCHEME_C or scheme == SCHEME_GIS_C

    for i in range(n_iter):
        status, mu, phi, sigma = _iterate(
            scheme, blocks, h, r, mu, phi, sigma,
            ytilde, log_w, m_k, s2_k, inv2_s2, log_s,
            b_mu, B_mu, a0, b0, B_sigma, b011, b022,
            normals[i], uniforms[i], gammas[i], include_h0,
            d, e, c, ld, le, work, ht, tmp, acc)
        if status >= 0:
            return i, mu, phi, sigma

        mean_h = 0.0
        for t in range(T + 1):
            hc = h[t] if centered_baseline else mu + sigma * h[t]
            ht[t] = hc
            mean_h += hc
        mean_h /= T + 1.0
        var_h = 0.0
        for t in range(T + 1):
            dv = ht[t] - mean_h
            var_h += dv * dv
        var_h /= T + 1.0

        for t in range(T):
            k = r[t]
            ytilde[t] = ht[t + 1] + m_k[k] + np.sqrt(s2_k[k]) * regen_z[i, t]

        out_stats[i, 0] = mu
        out_stats[i, 1] = mu * mu
        out_stats[i, 2] = phi
        out_stats[i, 3] = phi * phi
        out_stats[i, 4] = sigma * sigma
        out_stats[i, 5] = sigma ** 4
        out_stats[i, 6] = mean_h
        out_stats[i, 7] = var_h
    return -1, mu, phi, sigma
