"""Verification runs: every requested check on one shape, and resolution sweeps."""
from __future__ import annotations

from .functionals import (
    EQUALITY_TOL,
    NON_SPHERE_SPREAD,
    CENTERED_SPREAD,
    STRICT_TOL,
    check_gradient_term,
    check_heintze_karcher,
    check_minkowski_integral,
    check_newton_maclaurin_scan,
    check_pointwise_minkowski,
    check_theorem_chains,
    check_weighted_minkowski,
    check_weighted_minkowski_inequality,
    evaluate_functionals,
    pointwise_minkowski_residual,
)
from .reports import HYPOTHESIS_NOT_MET, CheckEntry, ResidualReport
from .scenario import CHECKS
from .surface import RadialShape, build_geometry, make_grid

__all__ = ["REFERENCE_RESOLUTION", "reference_resolution", "run_checks", "convergence_rows"]

#: resolution at which integral identities are resolved to better than 1e-8
REFERENCE_RESOLUTION = {2: 64, 3: 32}


def reference_resolution(shape: RadialShape) -> int:
    return max(REFERENCE_RESOLUTION[shape.dimension], 2 * shape.band_limit + 2)


def run_checks(
    shape: RadialShape,
    resolution: int | None = None,
    checks=CHECKS,
    ks=None,
    j: int = 0,
    name: str = "",
) -> ResidualReport:
    """Evaluate the requested checks for every ``k`` in ``ks`` (default ``1..n-1``)."""
    if resolution is None:
        resolution = reference_resolution(shape)
    n = shape.dimension
    m = n - 1
    ks = list(range(1, n)) if ks is None else list(ks)
    geo = build_geometry(shape, make_grid(n, resolution))
    table = evaluate_functionals(geo)
    report = ResidualReport(
        meta={
            "name": name,
            "dimension": n,
            "band_limit": shape.band_limit,
            "resolution": resolution,
            "shape": shape.description,
            "tolerances": {
                "equality_rel": EQUALITY_TOL,
                "strict_margin": STRICT_TOL,
                "centered_spread": CENTERED_SPREAD,
                "non_sphere_spread": NON_SPHERE_SPREAD,
            },
            "functionals": table.to_dict(),
        }
    )
    for check in checks:
        if check == "heintze_karcher":
            report.add(check_heintze_karcher(table))
            continue
        if check == "newton_maclaurin_scan":
            if m < 2:
                report.add(
                    CheckEntry("newton_maclaurin_scan", None, None, None, None, STRICT_TOL,
                               HYPOTHESIS_NOT_MET, "Newton-Maclaurin inequality", "needs n-1 >= 2")
                )
            for k in ks:
                for jj in range(1, k):
                    report.add(check_newton_maclaurin_scan(geo, jj, k))
            continue
        for k in ks:
            if check == "minkowski_pointwise":
                report.add(check_pointwise_minkowski(geo, table, k))
            elif check == "minkowski_integral":
                report.add(check_minkowski_integral(table, k))
            elif check == "weighted_minkowski":
                report.add(check_weighted_minkowski(table, k))
                report.add(check_gradient_term(table, k))
            elif check == "weighted_minkowski_inequality":
                report.add(check_weighted_minkowski_inequality(table, k))
            elif check == "theorem_chains":
                if j < k:
                    report.add(check_theorem_chains(table, geo, k, j))
            else:
                raise ValueError(f"unknown check {check!r}")
    return report


def convergence_rows(shape: RadialShape, resolutions, ks=None) -> list[tuple[int, str, float]]:
    """``(resolution, check, residual)`` rows for the identity checks.

    Integral identities report the relative residual; the pointwise identity
    reports its sup-norm over the nodes.
    """
    n = shape.dimension
    ks = list(range(1, n)) if ks is None else list(ks)
    rows = []
    for N in resolutions:
        geo = build_geometry(shape, make_grid(n, N))
        table = evaluate_functionals(geo)
        for k in ks:
            rows.append((N, f"minkowski_integral[k={k}]", abs(check_minkowski_integral(table, k).rel_residual)))
            rows.append((N, f"weighted_minkowski[k={k}]", abs(check_weighted_minkowski(table, k).rel_residual)))
            rows.append((N, f"minkowski_pointwise[k={k}]", pointwise_minkowski_residual(geo, k).sup))
    return rows
