"""Symmetric tridiagonal Cholesky factorization and band solves.

The latent volatility path has a tridiagonal precision matrix, so the full
path can be drawn in one shot: factorize the precision as L L', forward
substitute, add white noise, back substitute.  Everything here is O(n) with
lower-bidiagonal storage (one diagonal, one off-diagonal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "SymTridiag",
    "BandCholesky",
    "NotPositiveDefiniteError",
    "cholesky",
    "solve_lower",
    "solve_upper",
    "awol_draw",
    "awol_draw_given_noise",
]


class NotPositiveDefiniteError(ValueError):
    """Raised when a Cholesky pivot is non-positive.

    Carries the 0-based index of the failing pivot.
    """

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"non-positive Cholesky pivot at index {index}")


@dataclass(frozen=True)
class SymTridiag:
    """Symmetric tridiagonal matrix stored as main and first off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.ascontiguousarray(self.diag, dtype=np.float64)
        offdiag = np.ascontiguousarray(self.offdiag, dtype=np.float64)
        if diag.ndim != 1 or offdiag.ndim != 1:
            raise ValueError("diag and offdiag must be 1-d")
        if diag.size < 1 or offdiag.size != diag.size - 1:
            raise ValueError("offdiag must have length len(diag) - 1")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    @property
    def n(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        """Dense copy, for oracles and debugging only."""
        full = np.diag(self.diag)
        idx = np.arange(self.n - 1)
        full[idx, idx + 1] = self.offdiag
        full[idx + 1, idx] = self.offdiag
        return full


@dataclass(frozen=True)
class BandCholesky:
    """Lower-bidiagonal Cholesky factor L with L L' = the input matrix."""

    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def n(self) -> int:
        return self.diag.size


@njit(cache=True, nogil=True)
def _chol_tridiag(d, e, out_ld, out_le):
    """Factor a symmetric tridiagonal matrix in place.

    Returns -1 on success, else the index of the first non-positive pivot.
    """
    n = d.shape[0]
    pivot = d[0]
    if not pivot > 0.0:
        return 0
    out_ld[0] = np.sqrt(pivot)
    for i in range(1, n):
        le = e[i - 1] / out_ld[i - 1]
        out_le[i - 1] = le
        pivot = d[i] - le * le
        if not pivot > 0.0:
            return i
        out_ld[i] = np.sqrt(pivot)
    return -1


@njit(cache=True, nogil=True)
def _solve_lower(ld, le, b, out):
    n = ld.shape[0]
    out[0] = b[0] / ld[0]
    for i in range(1, n):
        out[i] = (b[i] - le[i - 1] * out[i - 1]) / ld[i]


@njit(cache=True, nogil=True)
def _solve_upper(ld, le, b, out):
    n = ld.shape[0]
    out[n - 1] = b[n - 1] / ld[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = (b[i] - le[i] * out[i + 1]) / ld[i]


@njit(cache=True, nogil=True)
def _awol_given_noise(ld, le, c, eps, work, out):
    """out = solve_upper(L, solve_lower(L, c) + eps)."""
    _solve_lower(ld, le, c, work)
    n = ld.shape[0]
    for i in range(n):
        work[i] += eps[i]
    _solve_upper(ld, le, work, out)


def cholesky(m: SymTridiag) -> BandCholesky:
    """Banded Cholesky factorization of a symmetric tridiagonal matrix.

    Raises :class:`NotPositiveDefiniteError` with the failing pivot index if
    the matrix is not positive definite.
    """
    ld = np.empty(m.n)
    le = np.empty(m.n - 1)
    bad = _chol_tridiag(m.diag, m.offdiag, ld, le)
    if bad >= 0:
        raise NotPositiveDefiniteError(bad)
    return BandCholesky(ld, le)


def _check_rhs(f: BandCholesky, rhs: np.ndarray) -> np.ndarray:
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    if rhs.shape != (f.n,):
        raise ValueError(f"rhs has shape {rhs.shape}, expected ({f.n},)")
    return rhs


def solve_lower(f: BandCholesky, rhs: np.ndarray) -> np.ndarray:
    """Solve L a = rhs by forward substitution."""
    rhs = _check_rhs(f, rhs)
    out = np.empty(f.n)
    _solve_lower(f.diag, f.offdiag, rhs, out)
    return out


def solve_upper(f: BandCholesky, rhs: np.ndarray) -> np.ndarray:
    """Solve L' x = rhs by back substitution."""
    rhs = _check_rhs(f, rhs)
    out = np.empty(f.n)
    _solve_upper(f.diag, f.offdiag, rhs, out)
    return out


def awol_draw_given_noise(m: SymTridiag, c: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """One multivariate normal draw with precision ``m``, injected noise.

    With eps ~ N(0, I) the result is exactly N(m^{-1} c, m^{-1}); passing a
    fixed eps makes the draw a deterministic function, which is what the
    dense-oracle tests exercise.
    """
    f = cholesky(m)
    c = _check_rhs(f, c)
    eps = _check_rhs(f, eps)
    work = np.empty(f.n)
    out = np.empty(f.n)
    _awol_given_noise(f.diag, f.offdiag, c, eps, work, out)
    return out


def awol_draw(m: SymTridiag, c: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw from N(m^{-1} c, m^{-1}) using band substitution only."""
    return awol_draw_given_noise(m, c, rng.standard_normal(m.n))
