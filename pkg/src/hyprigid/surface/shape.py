"""Spectral radial shapes ``r(theta)`` over the unit sphere."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..ambient import RADIUS_CAP, SphereSpec, sphere_radial_function
from .basis import (
    angles_from_directions,
    basis_size,
    coefficient_labels,
    evaluate_basis,
    label_position,
    make_grid,
    node_basis,
)

__all__ = [
    "RadialShape",
    "ShapeError",
    "sphere_shape",
    "project_shape",
    "off_center_sphere_shape",
    "perturb_sphere",
    "rotate_shape",
    "constant_coefficient_scale",
    "load_shape",
    "save_shape",
]

#: band limits kept for desk-scale optimization; spectral projections of
#: reference shapes may go higher
MAX_BAND_LIMIT = 48


class ShapeError(ValueError):
    pass


def constant_coefficient_scale(dimension: int) -> float:
    """Value of the constant basis function (``1/sqrt(|S^{n-1}|)``)."""
    return 1.0 / np.sqrt(2 * np.pi) if dimension == 2 else 1.0 / np.sqrt(4 * np.pi)


@dataclass(frozen=True, eq=False)
class RadialShape:
    """Band-limited radius function in the orthonormal basis of :mod:`.basis`."""

    dimension: int
    band_limit: int
    coefficients: np.ndarray = field(repr=False)
    description: str = ""

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ShapeError(f"dimension must be 2 or 3, got {self.dimension}")
        if not (0 <= self.band_limit <= MAX_BAND_LIMIT):
            raise ShapeError(f"band limit {self.band_limit} outside [0, {MAX_BAND_LIMIT}]")
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (basis_size(self.dimension, self.band_limit),):
            raise ShapeError(
                f"expected {basis_size(self.dimension, self.band_limit)} coefficients, got {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ShapeError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def __eq__(self, other):
        if not isinstance(other, RadialShape):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self.band_limit == other.band_limit
            and np.array_equal(self.coefficients, other.coefficients)
        )

    def radius_at(self, angles, order: int = 0) -> dict[str, np.ndarray]:
        """``r`` and (for ``order`` > 0) its angular derivatives at ``angles``."""
        B = evaluate_basis(self.dimension, self.band_limit, angles, order=order)
        return {k: v @ self.coefficients for k, v in B.items()}

    def radius(self, directions) -> np.ndarray:
        ang = angles_from_directions(self.dimension, directions)
        return self.radius_at(ang)["f"]

    def on_grid(self, resolution: int) -> dict[str, np.ndarray]:
        B = node_basis(self.dimension, self.band_limit, resolution)
        return {k: v @ self.coefficients for k, v in B.items()}

    def with_coefficients(self, coefficients, description: str | None = None) -> "RadialShape":
        return RadialShape(
            self.dimension,
            self.band_limit,
            coefficients,
            self.description if description is None else description,
        )

    def truncated(self, L: int) -> "RadialShape":
        """Same shape with coefficients above ``L`` dropped or zero-padded."""
        c = np.zeros(basis_size(self.dimension, L))
        for lab in coefficient_labels(self.dimension, min(L, self.band_limit)):
            c[label_position(self.dimension, lab)] = self.coefficients[label_position(self.dimension, lab)]
        return RadialShape(self.dimension, L, c, self.description)

    # -- file format -----------------------------------------------------
    def to_dict(self) -> dict:
        labels = coefficient_labels(self.dimension, self.band_limit)
        return {
            "dimension": self.dimension,
            "band_limit": self.band_limit,
            "coefficients": [[*lab, float(v)] for lab, v in zip(labels, self.coefficients)],
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RadialShape":
        try:
            dimension = int(d["dimension"])
            L = int(d["band_limit"])
            rows = d["coefficients"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ShapeError(f"malformed shape record: {exc}") from exc
        c = np.zeros(basis_size(dimension, L))
        width = 2 if dimension == 2 else 3
        for row in rows:
            if len(row) != width:
                raise ShapeError(f"coefficient row {row!r} should have {width} entries")
            lab = tuple(int(x) for x in row[:-1])
            pos = label_position(dimension, lab)
            if pos >= c.shape[0]:
                raise ShapeError(f"index {lab} exceeds band limit {L}")
            c[pos] = float(row[-1])
        return cls(dimension, L, c, str(d.get("description", "")))


def save_shape(shape: RadialShape, path) -> None:
    Path(path).write_text(json.dumps(shape.to_dict(), indent=1) + "\n")


def load_shape(path) -> RadialShape:
    return RadialShape.from_dict(json.loads(Path(path).read_text()))


def sphere_shape(dimension: int, rho: float, L: int = 0) -> RadialShape:
    """Centred geodesic sphere of radius ``rho`` (only the constant mode is set)."""
    if not (0 < rho <= RADIUS_CAP):
        raise ShapeError(f"radius {rho} outside (0, {RADIUS_CAP}]")
    c = np.zeros(basis_size(dimension, L))
    c[0] = rho / constant_coefficient_scale(dimension)
    return RadialShape(dimension, L, c, f"centered sphere rho={rho}")


def project_shape(
    func: Callable[[np.ndarray], np.ndarray],
    dimension: int,
    L: int,
    resolution: int | None = None,
    description: str = "",
) -> RadialShape:
    """L2 projection of ``func(unit_vectors)`` onto the band-limited basis."""
    if resolution is None:
        resolution = 4 * (L + 1) + 8
    grid = make_grid(dimension, resolution)
    vals = np.asarray(func(grid.nodes), dtype=float)
    B = node_basis(dimension, L, resolution)["f"]
    c = B.T @ (grid.weights * vals)
    return RadialShape(dimension, L, c, description)


def off_center_sphere_shape(
    dimension: int,
    radius: float,
    center_distance: float,
    L: int,
    center_direction=None,
    resolution: int | None = None,
) -> RadialShape:
    """Spectral projection of a geodesic sphere whose centre is not the base point.

    The radius function is analytic, so the truncation error decays
    geometrically in ``L``.
    """
    if center_direction is None:
        center_direction = np.ones(dimension) / np.sqrt(dimension)
    spec = SphereSpec(radius, center_distance, center_direction)
    return project_shape(
        lambda u: sphere_radial_function(spec, u),
        dimension,
        L,
        resolution,
        description=f"sphere rho={radius} center_distance={center_distance}",
    )


def _random_unit_field(dimension: int, L: int, rng: np.random.Generator, check_resolution: int):
    c = np.zeros(basis_size(dimension, L))
    for lab in coefficient_labels(dimension, L):
        l = abs(lab[0])
        if l == 0:
            continue
        c[label_position(dimension, lab)] = rng.normal() / (1.0 + l) ** 2
    vals = node_basis(dimension, L, check_resolution)["f"] @ c
    sup = np.max(np.abs(vals))
    return c / sup


def perturb_sphere(
    rho: float,
    amplitude: float,
    seed: int,
    L: int,
    dimension: int = 3,
    convex: bool = True,
    max_tries: int = 200,
) -> RadialShape:
    """``rho + amplitude * f`` with ``f`` a random band-limited field of unit sup-norm.

    ``f`` has no constant mode and spectral weights ``(1 + l)^-2``; its sup-norm
    is measured on a fine grid.  With ``convex`` the draw is repeated from the
    same generator until every principal tuple on a check grid lies in the
    Garding cone of order ``n - 1``; the check grid is at least as fine as
    the reference verification grid.  Deterministic per seed.
    """
    from .geometry import build_geometry  # local import: geometry depends on this module
    from ..symm import garding_membership

    if amplitude < 0 or amplitude >= rho / 2:
        raise ShapeError(f"amplitude must lie in [0, rho/2), got {amplitude}")
    base = sphere_shape(dimension, rho, L)
    if amplitude == 0 or L == 0:
        return base.with_coefficients(base.coefficients, f"centered sphere rho={rho}")
    rng = np.random.default_rng(seed)
    # curvature carries more bandwidth than r, so the check grid is generous
    check = max(16 * (L + 1), 64) if dimension == 2 else max(8 * (L + 1), 32)
    for _ in range(max_tries):
        f = _random_unit_field(dimension, L, rng, 4 * L + 16)
        shape = base.with_coefficients(
            base.coefficients + amplitude * f,
            f"perturbed sphere rho={rho} amplitude={amplitude} seed={seed} L={L}",
        )
        if not convex:
            return shape
        try:
            geo = build_geometry(shape, make_grid(dimension, check))
        except ValueError:
            continue
        if np.all(garding_membership(geo.principal, dimension - 1)):
            return shape
    raise ShapeError(f"no admissible perturbation after {max_tries} draws (seed {seed})")


def rotate_shape(shape: RadialShape, angle: float) -> RadialShape:
    """Rotate by ``angle`` about the polar axis (the circle itself for n = 2).

    The rotated radius satisfies ``r'(u) = r(R^{-1} u)``.
    """
    c = np.array(shape.coefficients)
    out = c.copy()
    if shape.dimension == 2:
        pairs = [(l, (l,), (-l,)) for l in range(1, shape.band_limit + 1)]
    else:
        pairs = [
            (m, (l, m), (l, -m)) for l in range(1, shape.band_limit + 1) for m in range(1, l + 1)
        ]
    for freq, cos_lab, sin_lab in pairs:
        i = label_position(shape.dimension, cos_lab)
        j = label_position(shape.dimension, sin_lab)
        a, b = c[i], c[j]
        ca, sa = np.cos(freq * angle), np.sin(freq * angle)
        # a cos(m(t - angle)) + b sin(m(t - angle))
        out[i] = a * ca - b * sa
        out[j] = a * sa + b * ca
    return shape.with_coefficients(out, f"{shape.description} rotated by {angle}".strip())
