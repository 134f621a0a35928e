"""Pointwise geometry of a radial graph at quadrature nodes.

For ``Sigma = {(r(theta), theta)}`` in ``dr^2 + sinh(r)^2 dTheta^2`` with
``lam = sinh r`` and round metric ``s_ij``:

    g_ij = r_i r_j + lam^2 s_ij
    W    = sqrt(1 + |grad r|^2_s / lam^2)
    h_ij = (-r_;ij + lam lam' s_ij + 2 (lam'/lam) r_i r_j) / W

with the outward normal, so centred spheres have curvature ``coth(rho) > 0``.
Coordinates are the circle angle (n = 2) or (polar, azimuth) (n = 3).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ambient import RADIUS_CAP, NotStarShapedError, RadiusCapError
from .basis import QuadratureGrid, angles_from_directions
from .shape import RadialShape

__all__ = [
    "SurfaceGeometry",
    "DegeneracyError",
    "build_geometry",
    "geometry_at",
    "geometry_from_fields",
]


class DegeneracyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    """Node-wise geometric record of a radial graph (arrays over ``Q`` nodes).

    Attributes
    ----------
    r : (Q,)
    dr : (Q, m) coordinate derivatives of ``r``
    positions : (Q, n+1) hyperboloid coordinates
    metric, metric_inv : (Q, m, m)
    density : (Q,) ratio ``dmu / dsigma`` of induced to round area element
    area_weights : (Q,) ``density * quadrature weight``
    normal : (Q, n) outward unit normal in the orthonormal polar frame
    W : (Q,) graph factor
    second_form : (Q, m, m) ``h_ij``
    shape_operator : (Q, m, m) ``B = g^{-1} h`` (mixed indices)
    principal : (Q, m) ascending principal curvatures
    V, p : (Q,) potential ``cosh r`` and support ``sinh r / W``
    dV : (Q, m) coordinate covector ``d(V o X)``
    """

    grid: QuadratureGrid
    shape: RadialShape | None
    r: np.ndarray
    dr: np.ndarray
    positions: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    density: np.ndarray
    area_weights: np.ndarray
    normal: np.ndarray
    W: np.ndarray
    second_form: np.ndarray
    shape_operator: np.ndarray
    principal: np.ndarray
    V: np.ndarray
    p: np.ndarray
    dV: np.ndarray

    @property
    def m(self) -> int:
        return self.grid.dimension - 1

    @property
    def area(self) -> float:
        return float(np.sum(self.area_weights))

    def integrate(self, values) -> float:
        return float(np.sum(np.asarray(values) * self.area_weights))

    def radius_spread(self) -> float:
        """``(max r - min r) / mean r`` over the nodes."""
        return float((self.r.max() - self.r.min()) / self.r.mean())


def _round_metric(grid: QuadratureGrid) -> tuple[np.ndarray, np.ndarray]:
    """Round metric ``s_ij`` and its density ``sqrt(det s)`` at the nodes."""
    Q = grid.size
    if grid.dimension == 2:
        return np.ones((Q, 1, 1)), np.ones(Q)
    th = grid.angles[0]
    s = np.zeros((Q, 2, 2))
    s[:, 0, 0] = 1.0
    s[:, 1, 1] = np.sin(th) ** 2
    return s, np.sin(th)


def geometry_from_fields(grid: QuadratureGrid, fields: dict[str, np.ndarray], shape=None) -> SurfaceGeometry:
    """Assemble :class:`SurfaceGeometry` from ``r`` and its derivatives at the nodes."""
    r = np.asarray(fields["f"], dtype=float)
    if np.any(r <= 0):
        raise NotStarShapedError(f"radius not positive at {int(np.sum(r <= 0))} node(s)")
    if np.any(r > RADIUS_CAP):
        raise RadiusCapError(f"radius exceeds cap {RADIUS_CAP}")
    n = grid.dimension
    m = n - 1
    Q = grid.size
    sig, sig_density = _round_metric(grid)

    if n == 2:
        dr = fields["t"][:, None]
        hess = fields["tt"][:, None, None]
    else:
        th = grid.angles[0]
        cot = np.cos(th) / np.sin(th)
        rt, rp = fields["t"], fields["p"]
        dr = np.stack([rt, rp], axis=-1)
        hess = np.empty((Q, 2, 2))
        # covariant Hessian on the round sphere
        hess[:, 0, 0] = fields["tt"]
        hess[:, 0, 1] = hess[:, 1, 0] = fields["tp"] - cot * rp
        hess[:, 1, 1] = fields["pp"] + np.sin(th) * np.cos(th) * rt

    lam = np.sinh(r)
    dlam = np.cosh(r)
    sig_inv = np.linalg.inv(sig)
    grad2 = np.einsum("qi,qij,qj->q", dr, sig_inv, dr)
    W = np.sqrt(1.0 + grad2 / lam**2)
    rr = dr[:, :, None] * dr[:, None, :]
    g = rr + (lam**2)[:, None, None] * sig
    h = (-hess + (lam * dlam)[:, None, None] * sig + (2 * dlam / lam)[:, None, None] * rr) / W[:, None, None]

    det = np.linalg.det(g)
    if np.any(det <= 0) or not np.all(np.isfinite(det)):
        raise DegeneracyError("induced metric is singular")
    g_inv = np.linalg.inv(g)
    B = g_inv @ h
    # principal curvatures from L^{-1} h L^{-T}, a symmetric matrix similar to B
    chol = np.linalg.cholesky(g)
    Linv = np.linalg.inv(chol)
    S = Linv @ h @ np.swapaxes(Linv, -1, -2)
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    principal = np.linalg.eigvalsh(S)

    density = np.sqrt(det) / sig_density
    u = grid.nodes
    positions = np.concatenate([np.cosh(r)[:, None], lam[:, None] * u], axis=1)
    normal = np.empty((Q, n))
    normal[:, 0] = 1.0 / W
    normal[:, 1:] = -dr / (np.sqrt(np.einsum("qii->qi", sig)) * (W * lam)[:, None])

    return SurfaceGeometry(
        grid=grid,
        shape=shape,
        r=r,
        dr=dr,
        positions=positions,
        metric=g,
        metric_inv=g_inv,
        density=density,
        area_weights=density * grid.weights,
        normal=normal,
        W=W,
        second_form=h,
        shape_operator=B,
        principal=principal,
        V=np.cosh(r),
        p=lam / W,
        dV=lam[:, None] * dr,
    )


def build_geometry(shape: RadialShape, grid: QuadratureGrid) -> SurfaceGeometry:
    """Evaluate the radial graph of ``shape`` on ``grid``.

    Raises
    ------
    ValueError
        If the grid is coarser than ``2L + 2`` or dimensions differ.
    NotStarShapedError, RadiusCapError, DegeneracyError
    """
    if shape.dimension != grid.dimension:
        raise ValueError("shape and grid dimensions differ")
    if grid.resolution < 2 * shape.band_limit + 2:
        raise ValueError(
            f"grid resolution {grid.resolution} below 2L+2 = {2 * shape.band_limit + 2}"
        )
    return geometry_from_fields(grid, shape.on_grid(grid.resolution), shape)


def geometry_at(shape: RadialShape, directions) -> SurfaceGeometry:
    """Geometry at arbitrary unit vectors; quadrature weights are set to zero."""
    u = np.atleast_2d(np.asarray(directions, dtype=float))
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    angles = angles_from_directions(shape.dimension, u)
    Q = u.shape[0]
    grid = QuadratureGrid(shape.dimension, 0, angles, u, np.zeros(Q), (Q,))
    return geometry_from_fields(grid, shape.radius_at(angles, order=2), shape)
