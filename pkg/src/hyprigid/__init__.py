"""Weighted higher-order mean curvature functionals of star-shaped hypersurfaces in hyperbolic space."""

__version__ = "0.1.0"
