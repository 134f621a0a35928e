"""Finite-difference shape operator of the embedding in the hyperboloid model.

Independent of the graph formulas in :mod:`.geometry`: the surface is mapped
to ``X(a) = (cosh r, sinh r * u(a)) in R^{n,1}`` and the second fundamental
form is read off Minkowski products of central differences of ``X``.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import null_space

from ..ambient import minkowski
from .basis import angles_from_directions, directions_from_angles
from .shape import RadialShape

__all__ = ["PoleProximityError", "oracle_shape_operator", "embed"]


class PoleProximityError(ValueError):
    """The node is too close to a pole of the polar chart for the stencil."""


def embed(shape: RadialShape, angles) -> np.ndarray:
    r = shape.radius_at(angles)["f"]
    u = directions_from_angles(shape.dimension, angles)
    return np.concatenate([np.cosh(r)[..., None], np.sinh(r)[..., None] * u], axis=-1)


def _stencil(shape: RadialShape, a0: np.ndarray, h: float):
    m = a0.shape[0]
    E = np.eye(m) * h
    X0 = embed(shape, tuple(np.atleast_1d(x) for x in a0))[0]

    def X(offset):
        a = a0 + offset
        return embed(shape, tuple(np.atleast_1d(x) for x in a))[0]

    d1 = np.empty((m, X0.shape[0]))
    d2 = np.empty((m, m, X0.shape[0]))
    for i in range(m):
        xp, xm = X(E[i]), X(-E[i])
        d1[i] = (xp - xm) / (2 * h)
        d2[i, i] = (xp - 2 * X0 + xm) / h**2
        for j in range(i):
            d2[i, j] = d2[j, i] = (
                X(E[i] + E[j]) - X(E[i] - E[j]) - X(-E[i] + E[j]) + X(-E[i] - E[j])
            ) / (4 * h * h)
    return X0, d1, d2


def oracle_shape_operator(shape: RadialShape, node, h: float = 1e-3) -> np.ndarray:
    """Mixed-index shape operator at the unit vector ``node`` from central differences.

    The normal ``nu`` is the Minkowski-unit vector orthogonal to ``X`` and to
    the coordinate tangents, oriented so that ``<nu, d/dr> > 0``; then
    ``h_ij = -<d_i d_j X, nu>``.  Agreement with the graph formulas is ``O(h^2)``.
    """
    n = shape.dimension
    a0 = np.array([np.ravel(a)[0] for a in angles_from_directions(n, np.asarray(node, dtype=float))])
    if n == 3 and min(a0[0], np.pi - a0[0]) < 2 * h:
        raise PoleProximityError("node within 2h of a pole")
    X0, d1, d2 = _stencil(shape, a0, h)
    J = np.diag([-1.0] + [1.0] * n)
    nu = null_space(np.vstack([X0, d1]) @ J)[:, 0]
    nu = nu / np.sqrt(minkowski(nu, nu))
    r = np.arcsinh(np.linalg.norm(X0[1:]))
    u = X0[1:] / np.linalg.norm(X0[1:])
    radial = np.concatenate([[np.sinh(r)], np.cosh(r) * u])
    if minkowski(nu, radial) < 0:
        nu = -nu
    g = np.einsum("ia,ja->ij", d1 @ J, d1)
    hmat = -np.einsum("ija,a->ij", d2 @ J, nu)
    return np.linalg.solve(g, hmat)
