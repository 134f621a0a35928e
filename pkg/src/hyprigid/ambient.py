"""Hyperbolic space in polar coordinates and in the hyperboloid model.

The hyperboloid is ``{X in R^{n,1} : <X, X> = -1, X^0 > 0}`` with the
Minkowski product ``<X, Y> = -X^0 Y^0 + sum_i X^i Y^i``.  A point at geodesic
distance ``r`` from the base point in direction ``theta`` is
``X = (cosh r, sinh r * theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize

__all__ = [
    "RADIUS_CAP",
    "NotStarShapedError",
    "RadiusCapError",
    "minkowski",
    "AmbientPoint",
    "StaticPotential",
    "SphereSpec",
    "tangent_frame",
    "exp_map",
    "potential_value_and_gradient",
    "hessian_residual",
    "sphere_radial_function",
    "potential_minimum",
]

#: largest geodesic radius accepted anywhere in the package
RADIUS_CAP = 10.0


class NotStarShapedError(ValueError):
    pass


class RadiusCapError(ValueError):
    pass


def minkowski(X, Y) -> np.ndarray:
    """Lorentz product with signature (-, +, ..., +) along the last axis."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return -X[..., 0] * Y[..., 0] + np.sum(X[..., 1:] * Y[..., 1:], axis=-1)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("direction must be non-zero")
    return v / nrm


@dataclass(frozen=True)
class AmbientPoint:
    """Point of H^n given by distance ``r`` and unit direction ``theta``."""

    r: float
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = float(self.r)
        if not (0.0 <= r <= RADIUS_CAP):
            raise RadiusCapError(f"r={r} outside [0, {RADIUS_CAP}]")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", _unit(self.theta))

    @property
    def dimension(self) -> int:
        return self.theta.shape[0]

    @property
    def hyperboloid(self) -> np.ndarray:
        return np.concatenate([[np.cosh(self.r)], np.sinh(self.r) * self.theta])

    @classmethod
    def from_hyperboloid(cls, X) -> "AmbientPoint":
        X = np.asarray(X, dtype=float)
        spatial = X[1:]
        s = np.linalg.norm(spatial)
        r = float(np.arcsinh(s))
        if s == 0.0:
            theta = np.zeros_like(spatial)
            theta[0] = 1.0
        else:
            theta = spatial / s
        return cls(r, theta)


def tangent_frame(point: AmbientPoint) -> np.ndarray:
    """Orthonormal frame of T_X H^n as hyperboloid vectors, radial direction first.

    Returns an ``(n, n+1)`` array.  The angular vectors are an orthonormal basis
    of the tangent space of the unit sphere at ``theta``; for n = 3 they are the
    polar and azimuthal unit vectors.
    """
    r, th = point.r, point.theta
    n = th.shape[0]
    radial = np.concatenate([[np.sinh(r)], np.cosh(r) * th])
    ang = _sphere_tangent_basis(th)
    rows = [radial] + [np.concatenate([[0.0], e]) for e in ang]
    return np.array(rows).reshape(n, n + 1)


def _sphere_tangent_basis(th: np.ndarray) -> list[np.ndarray]:
    n = th.shape[0]
    if n == 2:
        return [np.array([-th[1], th[0]])]
    if n == 3:
        x, y, z = th
        rho = np.hypot(x, y)
        if rho < 1e-14:
            return [np.array([1.0, 0.0, 0.0]), np.array([0.0, np.sign(z) or 1.0, 0.0])]
        e_pol = np.array([x * z / rho, y * z / rho, -rho])
        e_az = np.array([-y / rho, x / rho, 0.0])
        return [e_pol, e_az]
    basis = null_space(th[None, :])
    return [basis[:, i] for i in range(basis.shape[1])]


def exp_map(X, v) -> np.ndarray:
    """Geodesic from hyperboloid point ``X`` with initial velocity ``v`` at time 1."""
    X = np.asarray(X, dtype=float)
    v = np.asarray(v, dtype=float)
    speed = np.sqrt(max(minkowski(v, v), 0.0))
    if speed == 0.0:
        return X.copy()
    return np.cosh(speed) * X + np.sinh(speed) * v / speed


@dataclass(frozen=True)
class StaticPotential:
    """Element ``a_0 cosh r + sum_i a_i x^i sinh r`` of the static potential space.

    On the hyperboloid this is the linear function ``a_0 X^0 + sum_i a_i X^i``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.shape[0] < 3:
            raise ValueError("need n+1 >= 3 coefficients")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, index: int, dimension: int) -> "StaticPotential":
        c = np.zeros(dimension + 1)
        c[index] = 1.0
        return cls(c)

    @property
    def dimension(self) -> int:
        return self.coeffs.shape[0] - 1

    def __call__(self, point: AmbientPoint) -> float:
        return float(self.on_hyperboloid(point.hyperboloid))

    def on_hyperboloid(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coeffs

    def eta(self, other: "StaticPotential | None" = None) -> float:
        """Lorentz pairing with signature (+, -, ..., -) on the coefficients."""
        b = self.coeffs if other is None else other.coeffs
        a = self.coeffs
        return float(a[0] * b[0] - a[1:] @ b[1:])


@dataclass(frozen=True)
class SphereSpec:
    """Geodesic sphere of radius ``radius`` centred at distance ``center_distance``."""

    radius: float
    center_distance: float = 0.0
    center_direction: np.ndarray | None = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.center_distance < 0:
            raise ValueError("center_distance must be non-negative")
        if self.radius + self.center_distance > RADIUS_CAP:
            raise RadiusCapError("sphere leaves the radius cap")
        if self.center_direction is not None:
            object.__setattr__(self, "center_direction", _unit(self.center_direction))

    @property
    def star_shaped(self) -> bool:
        return self.center_distance < self.radius

    def curvature(self) -> float:
        return 1.0 / np.tanh(self.radius)


def potential_value_and_gradient(V: StaticPotential, at: AmbientPoint) -> tuple[float, np.ndarray]:
    """Value of ``V`` and its ambient gradient in the orthonormal polar frame.

    The gradient is returned as ``(radial, angular_1, ..., angular_{n-1})`` with
    the angular axes from :func:`tangent_frame`.
    """
    if V.dimension != at.dimension:
        raise ValueError("potential and point dimensions differ")
    a0, a = V.coeffs[0], V.coeffs[1:]
    r, th = at.r, at.theta
    at_dot = float(a @ th)
    value = a0 * np.cosh(r) + at_dot * np.sinh(r)
    radial = a0 * np.sinh(r) + at_dot * np.cosh(r)
    tangential = a - at_dot * th
    ang = [float(tangential @ e) for e in _sphere_tangent_basis(th)]
    return float(value), np.array([radial] + ang)


def hessian_residual(V: StaticPotential, at: AmbientPoint, h: float) -> float:
    """Spectral norm of ``Hess V - V * b`` from geodesic central differences.

    Second derivatives are taken along geodesics ``exp_X(t v)`` in the hyperboloid
    model, with polarization for the mixed entries; the error is ``O(h^2)``.
    """
    if not (0.0 < h <= 0.1):
        raise ValueError(f"step h={h} must lie in (0, 0.1]")
    if at.r <= 0.0:
        raise ValueError("polar chart needs r > 0")
    X = at.hyperboloid
    frame = tangent_frame(at)
    n = frame.shape[0]
    f0 = V.on_hyperboloid(X)

    def second(v):
        fp = V.on_hyperboloid(exp_map(X, h * v))
        fm = V.on_hyperboloid(exp_map(X, -h * v))
        return (fp - 2.0 * f0 + fm) / h**2

    hess = np.empty((n, n))
    for a in range(n):
        hess[a, a] = second(frame[a])
        for b in range(a):
            hess[a, b] = hess[b, a] = 0.25 * (second(frame[a] + frame[b]) - second(frame[a] - frame[b]))
    return float(np.linalg.norm(hess - f0 * np.eye(n), 2))


def sphere_radial_function(s: SphereSpec, theta) -> np.ndarray | float:
    """Radius of the geodesic sphere ``s`` in direction(s) ``theta``.

    Solves ``cosh rho = cosh r cosh d - sinh r sinh d cos(alpha)`` in closed form:
    with ``A = cosh d`` and ``B = sinh d cos(alpha)`` the left side is
    ``sqrt(A^2 - B^2) cosh(r - delta)`` where ``tanh delta = B / A``.
    """
    if not s.star_shaped:
        raise NotStarShapedError(
            f"center distance {s.center_distance} >= radius {s.radius}: not star-shaped about the base point"
        )
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    theta = np.atleast_2d(theta)
    theta = theta / np.linalg.norm(theta, axis=-1, keepdims=True)
    d, rho = s.center_distance, s.radius
    if d == 0.0:
        out = np.full(theta.shape[0], rho)
    else:
        c = s.center_direction
        if c is None:
            c = np.zeros(theta.shape[-1])
            c[-1] = 1.0
        cos_a = np.clip(theta @ c, -1.0, 1.0)
        A = np.cosh(d)
        B = np.sinh(d) * cos_a
        R = np.sqrt(A * A - B * B)
        delta = np.arctanh(B / A)
        ratio = np.cosh(rho) / R
        if np.any(ratio < 1.0):
            raise ArithmeticError("no positive root")  # excluded by d < rho
        out = delta + np.arccosh(ratio)
    return float(out[0]) if single else out


def potential_minimum(V: StaticPotential) -> AmbientPoint:
    """Locate the minimum of a potential in the future unit hyperboloid.

    A coarse search over a polar grid is refined with a local minimizer in
    Cartesian coordinates ``y = sinh(r) theta``.
    """
    n = V.dimension
    if V.coeffs[0] <= 0 or V.eta() <= 0:
        raise ValueError("potential must lie in the future cone")

    def f(y):
        X = np.concatenate([[np.sqrt(1.0 + y @ y)], y])
        return V.on_hyperboloid(X)

    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(200, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.linspace(0.0, 4.0, 41)
    cand = (np.sinh(radii)[:, None, None] * dirs[None]).reshape(-1, n)
    start = cand[np.argmin([f(y) for y in cand])]
    res = minimize(f, start, method="BFGS", options={"gtol": 1e-12})
    return AmbientPoint.from_hyperboloid(np.concatenate([[np.sqrt(1.0 + res.x @ res.x)], res.x]))
