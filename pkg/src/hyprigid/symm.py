"""Elementary symmetric functions, normalized mean curvatures and Newton tensors.

Every function accepts a single principal tuple of shape ``(m,)`` or a batch
of shape ``(..., m)``; matrices are ``(m, m)`` or ``(..., m, m)`` and are
stored in mixed-index form (one upper, one lower index).
"""
from __future__ import annotations

from math import comb

import numpy as np

__all__ = [
    "DomainError",
    "PreconditionError",
    "elementary_symmetric",
    "sigma_k",
    "normalized_hk",
    "matrix_sigma",
    "newton_tensor",
    "garding_membership",
    "newton_maclaurin_check",
    "umbilic_spread",
    "is_umbilic",
    "UMBILIC_TOL",
]

#: relative spread below which a tuple counts as a multiple of (1, ..., 1)
UMBILIC_TOL = 1e-8


class DomainError(ValueError):
    """An index is outside the range where the quantity is defined."""


class PreconditionError(ValueError):
    """A hypothesis of an inequality is not satisfied by the input."""


def _as_tuple(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0 or lam.shape[-1] < 1:
        raise DomainError("principal tuple must have at least one entry")
    if not np.all(np.isfinite(lam)):
        raise DomainError("principal tuple has non-finite entries")
    return lam


def _check_index(k: int, lo: int, hi: int, name: str = "k") -> None:
    if not (lo <= k <= hi):
        raise DomainError(f"{name}={k} outside [{lo}, {hi}]")


def elementary_symmetric(lam, kmax: int | None = None) -> np.ndarray:
    """Return ``sigma_0 .. sigma_kmax`` of ``lam`` along a new last axis.

    The coefficients of ``prod_i (1 + lam_i t)`` are accumulated one root at a
    time, which costs ``O(m * kmax)`` and avoids subset enumeration.
    """
    lam = _as_tuple(lam)
    m = lam.shape[-1]
    if kmax is None:
        kmax = m
    _check_index(kmax, 0, m, "kmax")
    e = np.zeros(lam.shape[:-1] + (kmax + 1,))
    e[..., 0] = 1.0
    for i in range(m):
        li = lam[..., i, None]
        top = min(i + 1, kmax)
        # rhs is built from the old coefficients, so each root enters once
        e[..., 1 : top + 1] = e[..., 1 : top + 1] + li * e[..., 0:top]
    return e


def sigma_k(lam, k: int):
    """k-th elementary symmetric polynomial; ``sigma_0 = 1``."""
    lam = _as_tuple(lam)
    _check_index(k, 0, lam.shape[-1])
    out = elementary_symmetric(lam, k)[..., k]
    return float(out) if out.ndim == 0 else out


def normalized_hk(lam, k: int):
    """``sigma_k / C(m, k)`` with ``H_0 = 1``."""
    lam = _as_tuple(lam)
    m = lam.shape[-1]
    _check_index(k, 0, m)
    return sigma_k(lam, k) / comb(m, k)


def matrix_sigma(B, kmax: int | None = None) -> np.ndarray:
    """``sigma_0 .. sigma_kmax`` of the eigenvalues of ``B`` without eigensolving.

    Uses the Faddeev-LeVerrier recursion ``sigma_k = tr(B T_{k-1}) / k``, the
    same recursion that produces the Newton tensors.
    """
    B = np.asarray(B, dtype=float)
    m = B.shape[-1]
    if kmax is None:
        kmax = m
    _check_index(kmax, 0, m, "kmax")
    out = np.zeros(B.shape[:-2] + (kmax + 1,))
    out[..., 0] = 1.0
    eye = np.broadcast_to(np.eye(m), B.shape)
    T = eye
    for k in range(1, kmax + 1):
        BT = B @ T
        s = np.trace(BT, axis1=-2, axis2=-1) / k
        out[..., k] = s
        T = s[..., None, None] * eye - BT
    return out


def newton_tensor(B, k: int) -> np.ndarray:
    """Newton tensor ``T_k(B)`` in mixed-index form.

    ``T_0 = Id`` and ``T_k = sigma_k(B) Id - B T_{k-1}``.  Entry ``[i, j]`` equals
    the derivative of ``sigma_{k+1}`` with respect to ``B[j, i]``; for symmetric
    ``B`` the two index orders coincide.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim < 2 or B.shape[-1] != B.shape[-2]:
        raise DomainError("B must be square")
    m = B.shape[-1]
    _check_index(k, 0, m - 1)
    eye = np.broadcast_to(np.eye(m), B.shape)
    T = np.array(eye)
    for i in range(1, k + 1):
        BT = B @ T
        s = np.trace(BT, axis1=-2, axis2=-1) / i
        T = s[..., None, None] * eye - BT
    return T


def garding_membership(lam, k: int):
    """True iff ``sigma_j(lam) > 0`` for ``j = 1..k`` (strict, no epsilon)."""
    lam = _as_tuple(lam)
    _check_index(k, 1, lam.shape[-1])
    e = elementary_symmetric(lam, k)
    out = np.all(e[..., 1:] > 0, axis=-1)
    return bool(out) if out.ndim == 0 else out


def newton_maclaurin_check(lam, j: int, k: int):
    """Signed margin ``H_j - H_k^(j/k)`` for ``lam`` in the Garding cone of order k.

    Raises
    ------
    PreconditionError
        If any tuple of the batch lies outside the cone.
    """
    lam = _as_tuple(lam)
    m = lam.shape[-1]
    if not (1 <= j < k <= m):
        raise DomainError(f"need 1 <= j < k <= m, got j={j}, k={k}, m={m}")
    inside = np.asarray(garding_membership(lam, k))
    if not np.all(inside):
        raise PreconditionError("tuple outside the Garding cone of order k")
    e = elementary_symmetric(lam, k)
    hj = e[..., j] / comb(m, j)
    hk = e[..., k] / comb(m, k)
    out = hj - hk ** (j / k)
    return float(out) if out.ndim == 0 else out


def umbilic_spread(lam):
    """Relative spread ``max|l_i - l_j| / (1 + |mean|)`` of each tuple."""
    lam = _as_tuple(lam)
    spread = lam.max(axis=-1) - lam.min(axis=-1)
    out = spread / (1.0 + np.abs(lam.mean(axis=-1)))
    return float(out) if out.ndim == 0 else out


def is_umbilic(lam, tol: float = UMBILIC_TOL):
    out = np.asarray(umbilic_spread(lam)) < tol
    return bool(out) if out.ndim == 0 else out
