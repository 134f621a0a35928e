"""Star-shaped hypersurfaces as spectral radial graphs over S^{n-1}."""
from .basis import QuadratureGrid, make_grid
from .geometry import DegeneracyError, SurfaceGeometry, build_geometry
from .oracle import PoleProximityError, oracle_shape_operator
from .shape import (
    RadialShape,
    ShapeError,
    load_shape,
    off_center_sphere_shape,
    perturb_sphere,
    project_shape,
    rotate_shape,
    save_shape,
    sphere_shape,
)

__all__ = [
    "QuadratureGrid",
    "make_grid",
    "DegeneracyError",
    "SurfaceGeometry",
    "build_geometry",
    "PoleProximityError",
    "oracle_shape_operator",
    "RadialShape",
    "ShapeError",
    "load_shape",
    "off_center_sphere_shape",
    "perturb_sphere",
    "project_shape",
    "rotate_shape",
    "save_shape",
    "sphere_shape",
]
