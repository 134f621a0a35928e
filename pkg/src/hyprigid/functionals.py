"""Weighted curvature integrals and residual checks of the integral identities.

All integrals are quadrature sums ``sum_q f_q dmu_q`` over a
:class:`~hyprigid.surface.SurfaceGeometry`.  Tables store normalized
``H_k = sigma_k / C(m, k)``; un-normalized ``sigma_k`` only appears in the
pointwise divergence identity.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from .reports import (
    DIAGNOSTIC,
    EQUALITY,
    FAIL,
    HYPOTHESIS_NOT_MET,
    PASS,
    CheckEntry,
)
from .surface.geometry import SurfaceGeometry
from .surface.spectral import round_divergence
from .symm import elementary_symmetric, garding_membership, newton_tensor, umbilic_spread

__all__ = [
    "EQUALITY_TOL",
    "STRICT_TOL",
    "CENTERED_SPREAD",
    "NON_SPHERE_SPREAD",
    "ANCHORS",
    "FunctionalTable",
    "MinkowskiResidual",
    "curvature_fields",
    "umbilicity",
    "convex_order",
    "evaluate_functionals",
    "pointwise_minkowski_residual",
    "check_minkowski_integral",
    "check_weighted_minkowski",
    "check_gradient_term",
    "check_weighted_minkowski_inequality",
    "check_heintze_karcher",
    "check_newton_maclaurin_scan",
    "check_theorem_chains",
]

#: relative residual accepted as equality
EQUALITY_TOL = 1e-8
#: margin below ``-STRICT_TOL * max(1, scale)`` is a violation
STRICT_TOL = 1e-10
#: radius / umbilicity spread below which a shape counts as the equality case
CENTERED_SPREAD = 1e-8
#: spread above which equality would contradict the rigidity statements
NON_SPHERE_SPREAD = 1e-3

ANCHORS = {
    "pointwise": "pointwise weighted Minkowski identity div(T_{k-1} grad V) = -k p sigma_k + (n-k) V sigma_{k-1}",
    "integral": "Minkowski integral identity int p H_k = int V H_{k-1}",
    "weighted": "weighted Minkowski identity int p V H_k = int V^2 H_{k-1} + gradient term",
    "gradient": "positivity of the Newton tensor gradient term on k-convex surfaces",
    "inequality": "weighted Minkowski inequality int p V H_k >= int V^2 H_{k-1}; equality iff centered sphere",
    "hk": "Heintze-Karcher inequality int p <= int V / H_1; equality iff totally umbilical",
    "nm": "Newton-Maclaurin inequality H_j >= H_k^(j/k)",
    "chain": "rigidity chain for constant V H_k",
    "ratio": "rigidity chain for constant V H_k / H_j",
}


def curvature_fields(geo: SurfaceGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Node-wise ``sigma_0..sigma_m`` and ``H_0..H_m``, each of shape ``(Q, m+1)``."""
    m = geo.m
    sig = elementary_symmetric(geo.principal)
    H = sig / np.array([comb(m, k) for k in range(m + 1)])
    return sig, H


def umbilicity(geo: SurfaceGeometry) -> float:
    """Largest node-wise principal spread; for curves, the spread of the curvature."""
    if geo.m == 1:
        return float(umbilic_spread(geo.principal[:, 0]))
    return float(np.max(umbilic_spread(geo.principal)))


def convex_order(geo: SurfaceGeometry) -> int:
    """Largest ``k`` with every principal tuple in the Garding cone of order ``k``."""
    best = 0
    for k in range(1, geo.m + 1):
        if not np.all(garding_membership(geo.principal, k)):
            break
        best = k
    return best


def _gradient_field(geo: SurfaceGeometry, k: int) -> np.ndarray:
    """Contravariant ``Y^j = T_{k-1}^{ij} d_i V`` at the nodes."""
    T = newton_tensor(geo.shape_operator, k - 1)
    Tup = T @ geo.metric_inv
    return np.einsum("qij,qi->qj", Tup, geo.dV)


@dataclass
class FunctionalTable:
    """Weighted integrals of one shape, keyed by curvature index."""

    dimension: int
    k_max: int
    area: float
    VH: dict[int, float]
    pH: dict[int, float]
    V2H: dict[int, float]
    pVH: dict[int, float]
    grad: dict[int, float]
    Vpow: dict[int, float]
    p: float
    V_over_H1: float | None
    radius_spread: float
    umbilicity: float
    convex_order: int
    unavailable: list[str] = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.dimension - 1

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("VH", "pH", "V2H", "pVH", "grad", "Vpow"):
            d[key] = {str(k): v for k, v in d[key].items()}
        return d


def evaluate_functionals(geo: SurfaceGeometry, k_max: int | None = None) -> FunctionalTable:
    m = geo.m
    if k_max is None:
        k_max = m
    if not (1 <= k_max <= m):
        raise ValueError(f"k_max={k_max} outside [1, {m}]")
    _, H = curvature_fields(geo)
    V, p = geo.V, geo.p
    I = geo.integrate
    table = FunctionalTable(
        dimension=geo.grid.dimension,
        k_max=k_max,
        area=geo.area,
        VH={k: I(V * H[:, k]) for k in range(k_max + 1)},
        pH={k: I(p * H[:, k]) for k in range(k_max + 1)},
        V2H={k: I(V * V * H[:, k]) for k in range(k_max + 1)},
        pVH={k: I(p * V * H[:, k]) for k in range(k_max + 1)},
        grad={},
        Vpow={k: I(V ** (1.0 + 1.0 / k)) for k in range(1, k_max + 1)},
        p=I(p),
        V_over_H1=None,
        radius_spread=geo.radius_spread(),
        umbilicity=umbilicity(geo),
        convex_order=convex_order(geo),
    )
    for k in range(1, k_max + 1):
        Y = _gradient_field(geo, k)
        table.grad[k] = I(np.einsum("qj,qj->q", Y, geo.dV)) / (k * comb(m, k))
    if np.all(H[:, 1] > 0):
        table.V_over_H1 = I(V / H[:, 1])
    else:
        table.unavailable.append("V_over_H1")
    return table


@dataclass
class MinkowskiResidual:
    """Node field of the pointwise identity; ``integrated`` is normalized by ``k C(m,k)``."""

    k: int
    field: np.ndarray
    sup: float
    integrated: float


def pointwise_minkowski_residual(geo: SurfaceGeometry, k: int) -> MinkowskiResidual:
    """``R = div_g(Y) + k p sigma_k - (n-k) V sigma_{k-1}`` with ``Y = T_{k-1} grad V``.

    ``div_g Y = (1/s) div_round(s Y)`` where ``s`` is the area density, and the
    round divergence is spectral (see :func:`round_divergence`).
    """
    m = geo.m
    n = m + 1
    if not (1 <= k <= m):
        raise ValueError(f"k={k} outside [1, {m}]")
    if geo.grid.resolution == 0:
        raise ValueError("pointwise residual needs a quadrature grid")
    sig = elementary_symmetric(geo.principal, k)
    Y = _gradient_field(geo, k)
    div = round_divergence(geo.grid, geo.density[:, None] * Y) / geo.density
    R = div + k * geo.p * sig[:, k] - (n - k) * geo.V * sig[:, k - 1]
    return MinkowskiResidual(k, R, float(np.max(np.abs(R))), geo.integrate(R) / (k * comb(m, k)))


# -- verdict helpers -------------------------------------------------------


def _scale(lhs, rhs) -> float:
    return max(abs(lhs), abs(rhs), 1e-300)


def identity_entry(name, lhs, rhs, anchor, tol=EQUALITY_TOL, note="") -> CheckEntry:
    res = lhs - rhs
    rel = res / _scale(lhs, rhs)
    verdict = PASS if abs(rel) < tol else FAIL
    return CheckEntry(name, lhs, rhs, res, rel, tol, verdict, anchor, note)


def inequality_entry(
    name,
    lhs,
    rhs,
    anchor,
    *,
    equality_case: bool,
    outside_equality_case: bool,
    hypothesis: bool = True,
    note: str = "",
) -> CheckEntry:
    """Entry for ``lhs >= rhs``; see module constants for the thresholds."""
    res = lhs - rhs
    scale = _scale(lhs, rhs)
    rel = res / scale
    if not hypothesis:
        verdict = HYPOTHESIS_NOT_MET
    elif res < -STRICT_TOL * max(1.0, scale):
        verdict = FAIL
        note = (note + "; " if note else "") + "inequality violated"
    elif abs(rel) < EQUALITY_TOL:
        if equality_case:
            verdict = EQUALITY
        elif outside_equality_case:
            verdict = FAIL
            note = (note + "; " if note else "") + "equality outside the characterized equality case"
        else:
            verdict = PASS
    else:
        verdict = PASS
    return CheckEntry(name, lhs, rhs, res, rel, STRICT_TOL, verdict, anchor, note)


# -- checks ----------------------------------------------------------------


def check_pointwise_minkowski(geo: SurfaceGeometry, table: FunctionalTable, k: int) -> list[CheckEntry]:
    """Sup-norm of the pointwise residual and its agreement with the integral identity."""
    res = pointwise_minkowski_residual(geo, k)
    scale = max(abs(table.pH[k]), abs(table.VH[k - 1]))
    integral_residual = table.pH[k] - table.VH[k - 1]
    sup_rel = res.sup / max(1.0, float(np.max(np.abs(geo.V * elementary_symmetric(geo.principal, k)[:, k - 1]))))
    return [
        CheckEntry(
            f"pointwise_minkowski[k={k}]",
            res.sup,
            0.0,
            res.sup,
            sup_rel,
            EQUALITY_TOL,
            DIAGNOSTIC,
            ANCHORS["pointwise"],
            "sup-norm over nodes; decays spectrally with resolution",
        ),
        _absolute_entry(
            f"pointwise_minkowski_integrated[k={k}]",
            res.integrated,
            integral_residual,
            1e-10 * max(1.0, scale),
            ANCHORS["pointwise"],
            "discrete divergence theorem: integrated residual equals the integral-identity residual",
        ),
    ]


def _absolute_entry(name, lhs, rhs, tol, anchor, note="") -> CheckEntry:
    res = lhs - rhs
    rel = res / _scale(lhs, rhs)
    return CheckEntry(name, lhs, rhs, res, rel, tol, PASS if abs(res) <= tol else FAIL, anchor, note)


def check_minkowski_integral(table: FunctionalTable, k: int) -> CheckEntry:
    return identity_entry(f"minkowski_integral[k={k}]", table.pH[k], table.VH[k - 1], ANCHORS["integral"])


def check_weighted_minkowski(table: FunctionalTable, k: int) -> CheckEntry:
    return identity_entry(
        f"weighted_minkowski[k={k}]",
        table.pVH[k],
        table.V2H[k - 1] + table.grad[k],
        ANCHORS["weighted"],
        note=f"gradient term {table.grad[k]!r}",
    )


def check_gradient_term(table: FunctionalTable, k: int) -> CheckEntry:
    hyp = table.convex_order >= k
    g = table.grad[k]
    if not hyp:
        verdict = HYPOTHESIS_NOT_MET
    elif g < -1e-12 * max(1.0, abs(table.pVH[k])):
        verdict = FAIL
    elif table.radius_spread < CENTERED_SPREAD:
        verdict = EQUALITY
    else:
        verdict = PASS
    return CheckEntry(f"gradient_term[k={k}]", g, 0.0, g, None, 1e-12, verdict, ANCHORS["gradient"])


def check_weighted_minkowski_inequality(table: FunctionalTable, k: int) -> CheckEntry:
    return inequality_entry(
        f"weighted_minkowski_inequality[k={k}]",
        table.pVH[k],
        table.V2H[k - 1],
        ANCHORS["inequality"],
        equality_case=table.radius_spread < CENTERED_SPREAD,
        outside_equality_case=table.radius_spread > NON_SPHERE_SPREAD,
        hypothesis=table.convex_order >= k,
        note=f"radius spread {table.radius_spread!r}",
    )


def check_heintze_karcher(table: FunctionalTable) -> CheckEntry:
    if table.V_over_H1 is None:
        return CheckEntry(
            "heintze_karcher", None, table.p, None, None, STRICT_TOL, HYPOTHESIS_NOT_MET, ANCHORS["hk"],
            "mean curvature not positive everywhere",
        )
    return inequality_entry(
        "heintze_karcher",
        table.V_over_H1,
        table.p,
        ANCHORS["hk"],
        equality_case=table.umbilicity < CENTERED_SPREAD,
        outside_equality_case=table.umbilicity > NON_SPHERE_SPREAD,
        note=f"umbilicity {table.umbilicity!r}",
    )


def check_newton_maclaurin_scan(geo: SurfaceGeometry, j: int, k: int) -> CheckEntry:
    """Smallest node-wise margin ``H_j - H_k^(j/k)`` over the surface."""
    hyp = np.all(garding_membership(geo.principal, k))
    _, H = curvature_fields(geo)
    with np.errstate(invalid="ignore"):
        margin = H[:, j] - np.abs(H[:, k]) ** (j / k)
    q = int(np.argmin(margin))
    umb = umbilic_spread(geo.principal[q]) if geo.m > 1 else 0.0
    return inequality_entry(
        f"newton_maclaurin_scan[j={j},k={k}]",
        float(H[q, j]),
        float(abs(H[q, k]) ** (j / k)),
        ANCHORS["nm"],
        equality_case=umb < CENTERED_SPREAD,
        outside_equality_case=umb > NON_SPHERE_SPREAD,
        hypothesis=bool(hyp),
        note=f"worst node {q}",
    )


def _defect(Q: np.ndarray) -> float:
    return float((Q.max() - Q.min()) / abs(Q.mean()))


def _closure_entry(name, entries, anchor, centered: bool, spread: float) -> CheckEntry:
    tight = all(
        e.verdict == EQUALITY or (e.rel_residual is not None and abs(e.rel_residual) < EQUALITY_TOL)
        for e in entries
    )
    if tight and centered:
        verdict = EQUALITY
    elif tight and spread > NON_SPHERE_SPREAD:
        verdict = FAIL
    else:
        verdict = PASS
    worst = max(abs(e.rel_residual) for e in entries if e.rel_residual is not None)
    return CheckEntry(
        name, None, None, worst, worst, EQUALITY_TOL, verdict, anchor,
        "all links tight" if tight else "at least one link strict",
    )


def _chain_constant_product(geo, table, k) -> list[CheckEntry]:
    _, H = curvature_fields(geo)
    V, I = geo.V, geo.integrate
    Q = V * H[:, k]
    centered = table.radius_spread < CENTERED_SPREAD
    outside = table.radius_spread > NON_SPHERE_SPREAD
    eq = dict(equality_case=centered, outside_equality_case=outside)
    # Newton-Maclaurin type links saturate on any umbilic surface
    umb = dict(
        equality_case=table.umbilicity < CENTERED_SPREAD,
        outside_equality_case=table.umbilicity > NON_SPHERE_SPREAD,
    )
    Hk = np.clip(H[:, k], 0.0, None)
    Vpow = table.Vpow[k]
    qmin, qmax = float(Q.min()), float(Q.max())
    lower = qmin ** ((k - 1) / k) / qmax * Vpow
    upper = qmin ** (-1.0 / k) * Vpow
    nm = H[:, k - 1] - Hk ** ((k - 1) / k)
    q = int(np.argmin(nm))
    name = f"chain[k={k}]"
    a = ANCHORS["chain"]
    nm_args = [
        (f"{name}.newton_maclaurin_pointwise", float(H[q, k - 1]), float(Hk[q] ** ((k - 1) / k))),
        (f"{name}.lower_integral", table.V2H[k - 1], I(V * V * Hk ** ((k - 1) / k))),
    ]
    upper_args = (f"{name}.upper_integral", I(V * Hk ** (-1.0 / k)), table.V_over_H1)
    if k == 1:
        # both sides coincide by definition
        nm_links = [identity_entry(*x, a, note="identity for k=1") for x in nm_args]
        upper_link = identity_entry(*upper_args, a, note="identity for k=1")
    else:
        nm_links = [inequality_entry(*x, a, **umb) for x in nm_args]
        upper_link = inequality_entry(*upper_args, a, **umb)
    links = [
        inequality_entry(f"{name}.weighted_minkowski", table.pVH[k], table.V2H[k - 1], a, **eq),
        *nm_links,
        inequality_entry(f"{name}.heintze_karcher", table.V_over_H1, table.p, a, **umb),
        upper_link,
        inequality_entry(f"{name}.squeeze_lower", table.p, lower, a, **eq,
                         note="min(VH_k)^((k-1)/k) / max(VH_k) * int V^(1+1/k)"),
        inequality_entry(f"{name}.squeeze_upper", upper, table.p, a, **eq,
                         note="min(VH_k)^(-1/k) * int V^(1+1/k)"),
    ]
    out = list(links)
    out.append(
        CheckEntry(f"{name}.constancy_defect", qmax, qmin, qmax - qmin, _defect(Q), EQUALITY_TOL,
                   DIAGNOSTIC, a, f"mean {float(Q.mean())!r}")
    )
    out.append(_closure_entry(f"{name}.closure", links, a, centered, table.radius_spread))
    return out


def _chain_ratio(geo, table, k, j) -> list[CheckEntry]:
    _, H = curvature_fields(geo)
    V = geo.V
    Q = V * H[:, k] / H[:, j]
    centered = table.radius_spread < CENTERED_SPREAD
    eq = dict(equality_case=centered, outside_equality_case=table.radius_spread > NON_SPHERE_SPREAD)
    qmin, qmax = float(Q.min()), float(Q.max())
    shifted = V * H[:, k - 1] / H[:, j - 1]
    gap = shifted - Q
    q = int(np.argmin(gap))
    name = f"ratio[k={k},j={j}]"
    links = [
        inequality_entry(f"{name}.pointwise", float(shifted[q]), float(Q[q]), ANCHORS["ratio"],
                         equality_case=table.umbilicity < CENTERED_SPREAD,
                         outside_equality_case=table.umbilicity > NON_SPHERE_SPREAD,
                         note="V H_{k-1}/H_{j-1} >= V H_k/H_j at the worst node"),
        inequality_entry(f"{name}.weighted_minkowski", table.pVH[k], table.V2H[k - 1], ANCHORS["ratio"], **eq),
        inequality_entry(f"{name}.upper", qmax * table.pH[j], table.pVH[k], ANCHORS["ratio"], **eq,
                         note="max(ratio) * int p H_j"),
        inequality_entry(f"{name}.lower", table.V2H[k - 1], qmin * table.VH[j - 1], ANCHORS["ratio"], **eq,
                         note="min(ratio) * int V H_{j-1}"),
    ]
    Qred = V * H[:, k - j]
    out = list(links)
    out.append(
        CheckEntry(f"{name}.constancy_defect", qmax, qmin, qmax - qmin, _defect(Q), EQUALITY_TOL,
                   DIAGNOSTIC, ANCHORS["ratio"], f"mean {float(Q.mean())!r}")
    )
    out.append(
        CheckEntry(f"{name}.reduced_index_defect", float(Qred.max()), float(Qred.min()),
                   float(Qred.max() - Qred.min()), _defect(Qred), EQUALITY_TOL, DIAGNOSTIC, ANCHORS["ratio"],
                   f"V H_{k - j}, the endpoint of the index reduction")
    )
    out.append(_closure_entry(f"{name}.closure", links, ANCHORS["ratio"], centered, table.radius_spread))
    return out


def check_theorem_chains(table: FunctionalTable, geo: SurfaceGeometry, k: int, j: int = 0) -> list[CheckEntry]:
    """Every link of the rigidity argument for constant ``V H_k`` (j = 0) or ``V H_k/H_j``.

    The links are evaluated in forms valid for arbitrary shapes: where the
    argument divides by the constant, the extremal node values of the
    product or ratio are used, so the upper and lower bounds meet only when
    it is constant.
    """
    m = geo.m
    if not (0 <= j < k <= m):
        raise ValueError(f"need 0 <= j < k <= {m}")
    _, H = curvature_fields(geo)
    hyp = table.convex_order >= k and (j == 0 or bool(np.all(H[:, j] > 0)))
    if table.V_over_H1 is None or k > table.k_max:
        anchor = ANCHORS["chain"] if j == 0 else ANCHORS["ratio"]
        return [
            CheckEntry(f"chain[k={k},j={j}]", None, None, None, None, STRICT_TOL, HYPOTHESIS_NOT_MET, anchor,
                       "curvature positivity fails somewhere on the surface")
        ]
    with np.errstate(divide="ignore", invalid="ignore"):
        entries = _chain_constant_product(geo, table, k) if j == 0 else _chain_ratio(geo, table, k, j)
    if not hyp:
        for e in entries:
            if e.verdict != DIAGNOSTIC:
                e.verdict = HYPOTHESIS_NOT_MET
    return entries
