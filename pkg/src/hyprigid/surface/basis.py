"""Orthonormal real bases on S^1 and S^2 and quadrature grids.

Coefficient layout
------------------
n = 2: signed index ``l`` in ``[-L, L]``; ``l = 0`` is the constant
``1/sqrt(2 pi)``, ``l > 0`` is ``cos(l t)/sqrt(pi)``, ``l < 0`` is
``sin(|l| t)/sqrt(pi)``.  Array position of ``l`` is ``2l - 1`` for ``l > 0``
and ``2|l|`` for ``l <= 0``.

n = 3: real spherical harmonics ``Y_lm`` (``-l <= m <= l``) built from the
orthonormal associated Legendre functions; ``m > 0`` carries ``cos(m phi)``,
``m < 0`` carries ``sin(|m| phi)``.  Array position is ``l^2 + l + m``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import sph_legendre_p_all

__all__ = [
    "QuadratureGrid",
    "make_grid",
    "basis_size",
    "coefficient_labels",
    "label_position",
    "evaluate_basis",
    "node_basis",
    "angles_from_directions",
    "directions_from_angles",
]


def basis_size(dimension: int, L: int) -> int:
    if dimension == 2:
        return 2 * L + 1
    if dimension == 3:
        return (L + 1) ** 2
    raise ValueError(f"dimension must be 2 or 3, got {dimension}")


def coefficient_labels(dimension: int, L: int) -> list[tuple[int, ...]]:
    """Index labels in array order: ``(l,)`` for n = 2, ``(l, m)`` for n = 3."""
    if dimension == 2:
        out = [(0,)]
        for l in range(1, L + 1):
            out += [(l,), (-l,)]
        return out
    basis_size(dimension, L)
    return [(l, m) for l in range(L + 1) for m in range(-l, l + 1)]


def label_position(dimension: int, label) -> int:
    if dimension == 2:
        (l,) = label
        return 2 * l - 1 if l > 0 else -2 * l
    l, m = label
    if abs(m) > l:
        raise ValueError(f"invalid harmonic index {label}")
    return l * l + l + m


def directions_from_angles(dimension: int, angles) -> np.ndarray:
    if dimension == 2:
        (t,) = angles
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    th, ph = angles
    s = np.sin(th)
    return np.stack([s * np.cos(ph), s * np.sin(ph), np.cos(th)], axis=-1)


def angles_from_directions(dimension: int, u) -> tuple[np.ndarray, ...]:
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    if dimension == 2:
        return (np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * np.pi),)
    th = np.arccos(np.clip(u[..., 2], -1.0, 1.0))
    ph = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * np.pi)
    return th, ph


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Product quadrature on the unit sphere S^{n-1}.

    n = 2 uses ``N`` equispaced nodes (exact for trigonometric degree < N).
    n = 3 uses ``N`` Gauss-Legendre nodes in ``cos(polar)`` times ``2N``
    equispaced azimuths, flattened polar-major; it is exact for spherical
    polynomials of degree ``<= 2N - 1`` and never touches the poles.
    """

    dimension: int
    resolution: int
    angles: tuple[np.ndarray, ...]
    nodes: np.ndarray
    weights: np.ndarray
    shape: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def exact_degree(self) -> int:
        return self.resolution - 1 if self.dimension == 2 else 2 * self.resolution - 1


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=64)
def make_grid(dimension: int, resolution: int) -> QuadratureGrid:
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if dimension == 2:
        t = 2 * np.pi * np.arange(resolution) / resolution
        w = np.full(resolution, 2 * np.pi / resolution)
        angles = (t,)
        shape = (resolution,)
    elif dimension == 3:
        x, wx = np.polynomial.legendre.leggauss(resolution)
        # north to south
        x, wx = x[::-1], wx[::-1]
        n_az = 2 * resolution
        ph = 2 * np.pi * np.arange(n_az) / n_az
        TH, PH = np.meshgrid(np.arccos(x), ph, indexing="ij")
        w = np.outer(wx, np.full(n_az, 2 * np.pi / n_az)).ravel()
        angles = (TH.ravel(), PH.ravel())
        shape = (resolution, n_az)
    else:
        raise ValueError(f"dimension must be 2 or 3, got {dimension}")
    nodes = directions_from_angles(dimension, angles)
    return QuadratureGrid(
        dimension,
        resolution,
        tuple(_frozen(a) for a in angles),
        _frozen(nodes),
        _frozen(w),
        shape,
    )


def evaluate_basis(dimension: int, L: int, angles, order: int = 2) -> dict[str, np.ndarray]:
    """Basis functions and their angular derivatives at the given angles.

    Returns arrays of shape ``(Q, basis_size)`` keyed by derivative name:
    ``f, t, tt`` for n = 2 and ``f, t, p, tt, tp, pp`` for n = 3 (``t`` polar
    or circle angle, ``p`` azimuth).  Derivatives are analytic.
    """
    if dimension == 2:
        (t,) = angles
        t = np.asarray(t, dtype=float).ravel()
        ls = np.array([l for (l,) in coefficient_labels(2, L)])
        freq = np.abs(ls)[None, :]
        arg = freq * t[:, None]
        c, s = np.cos(arg), np.sin(arg)
        is_sin = (ls < 0)[None, :]
        norm = np.where(ls == 0, 1 / np.sqrt(2 * np.pi), 1 / np.sqrt(np.pi))[None, :]
        f = np.where(is_sin, s, c) * norm
        out = {"f": f}
        if order >= 1:
            out["t"] = np.where(is_sin, c, -s) * freq * norm
        if order >= 2:
            out["tt"] = -(freq**2) * f
        return out

    th, ph = (np.asarray(a, dtype=float).ravel() for a in angles)
    P = sph_legendre_p_all(L, L, th, diff_n=2)  # (3, L+1, 2L+1, Q)
    n = basis_size(3, L)
    Q = th.shape[0]
    f = np.empty((Q, n))
    ft = np.empty((Q, n))
    ftt = np.empty((Q, n))
    fp = np.empty((Q, n))
    fpp = np.empty((Q, n))
    ftp = np.empty((Q, n))
    for l in range(L + 1):
        for m in range(-l, l + 1):
            j = l * l + l + m
            am = abs(m)
            p0, p1, p2 = P[0, l, am], P[1, l, am], P[2, l, am]
            if m == 0:
                f[:, j], ft[:, j], ftt[:, j] = p0, p1, p2
                fp[:, j] = fpp[:, j] = ftp[:, j] = 0.0
                continue
            scale = np.sqrt(2.0)
            if m > 0:
                a, da = np.cos(am * ph), -am * np.sin(am * ph)
            else:
                a, da = np.sin(am * ph), am * np.cos(am * ph)
            f[:, j] = scale * p0 * a
            ft[:, j] = scale * p1 * a
            ftt[:, j] = scale * p2 * a
            fp[:, j] = scale * p0 * da
            ftp[:, j] = scale * p1 * da
            fpp[:, j] = -(am**2) * f[:, j]
    out = {"f": f}
    if order >= 1:
        out.update(t=ft, p=fp)
    if order >= 2:
        out.update(tt=ftt, tp=ftp, pp=fpp)
    return out


@lru_cache(maxsize=64)
def node_basis(dimension: int, L: int, resolution: int) -> dict[str, np.ndarray]:
    """Cached :func:`evaluate_basis` on the nodes of ``make_grid(dimension, resolution)``."""
    grid = make_grid(dimension, resolution)
    out = evaluate_basis(dimension, L, grid.angles)
    for a in out.values():
        a.setflags(write=False)
    return out
