"""Spectral divergence of tangent vector fields sampled on a quadrature grid."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import sph_legendre_p_all

from .basis import QuadratureGrid

__all__ = ["round_divergence"]


@lru_cache(maxsize=16)
def _legendre_tables(resolution: int, lmax: int):
    x, _ = np.polynomial.legendre.leggauss(resolution)
    th = np.arccos(x[::-1])
    P = sph_legendre_p_all(lmax, lmax, th, diff_n=1)  # (2, l, m, theta)
    val = np.ascontiguousarray(P[0, :, : lmax + 1, :])
    der = np.ascontiguousarray(P[1, :, : lmax + 1, :])
    val.setflags(write=False)
    der.setflags(write=False)
    return val, der


def round_divergence(grid: QuadratureGrid, Z: np.ndarray) -> np.ndarray:
    """Divergence on the unit sphere of the field with coordinate components ``Z``.

    ``Z`` has shape ``(Q, n-1)``.  For n = 2 the derivative is taken with the
    FFT.  For n = 3 the divergence is computed in weak form,
    ``d_lm = -int Z . grad conj(Y_lm)``, for ``l <= N - 1`` and synthesized back
    to the nodes.  In both cases the quadrature of the result vanishes to
    rounding, which is the discrete divergence theorem.
    """
    Z = np.asarray(Z, dtype=float)
    if grid.dimension == 2:
        N = grid.resolution
        F = np.fft.rfft(Z[:, 0])
        k = np.arange(F.shape[0])
        D = 1j * k * F
        if N % 2 == 0:
            D[-1] = 0.0
        return np.fft.irfft(D, n=N)

    Nt, Na = grid.shape
    lmax = Nt - 1
    wx = np.polynomial.legendre.leggauss(Nt)[1][::-1]
    Zt = np.fft.rfft(Z[:, 0].reshape(Nt, Na), axis=1)[:, : lmax + 1] / Na
    Zp = np.fft.rfft(Z[:, 1].reshape(Nt, Na), axis=1)[:, : lmax + 1] / Na
    P, dP = _legendre_tables(Nt, lmax)  # (l, m, theta)
    m = np.arange(lmax + 1)
    # d[l, m] = -2 pi sum_i w_i (Zt_m P'_lm - i m Zp_m P_lm)
    d = -2 * np.pi * (
        np.einsum("i,im,lmi->lm", wx, Zt, dP) - 1j * m[None, :] * np.einsum("i,im,lmi->lm", wx, Zp, P)
    )
    Dm = np.einsum("lm,lmi->im", d, P)  # Fourier coefficients of the divergence per latitude
    spec = np.zeros((Nt, Na // 2 + 1), dtype=complex)
    spec[:, : lmax + 1] = Dm * Na
    return np.fft.irfft(spec, n=Na, axis=1).ravel()
