"""Shape optimization probes for the constancy of ``V H_k`` and ``V H_k / H_j``.

The objective is the area-weighted variance of ``Q = V H_k / H_j`` (``H_0 = 1``)
plus quadratic hinge penalties; it vanishes exactly on shapes where ``Q`` is
constant.  The total area is held fixed by solving for the constant
coefficient at every evaluation, so the optimizer only sees the
non-constant coefficients.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np
from scipy.optimize import brentq, least_squares, minimize

from .ambient import RADIUS_CAP
from .surface.basis import make_grid, node_basis
from .surface.geometry import geometry_from_fields
from .surface.shape import RadialShape, constant_coefficient_scale
from .symm import elementary_symmetric

__all__ = [
    "ProbeConfig",
    "ProbeResult",
    "ConstancyScan",
    "ProbeError",
    "constancy_scan",
    "objective",
    "run_probe",
    "sphere_radius_for_area",
    "METHODS",
]

log = logging.getLogger(__name__)

METHODS = ("gauss-newton", "simplex", "gradient")

#: value assigned to each residual of an infeasible candidate
_INFEASIBLE = 1e3


class ProbeError(ValueError):
    pass


@dataclass
class ProbeConfig:
    """Settings of one rigidity probe.

    ``j = 0`` probes constancy of ``V H_k``; ``j >= 1`` probes ``V H_k / H_j``.
    ``resolution`` defaults to ``4 (L + 1)``.
    """

    initial: RadialShape
    k: int
    j: int = 0
    resolution: int | None = None
    target_area: float | None = None
    method: str = "gauss-newton"
    max_evaluations: int = 10_000
    objective_tol: float = 1e-8
    spread_tol: float = 1e-3
    step_tol: float = 1e-14
    positivity_weight: float = 1e2
    cone_weight: float = 1e2
    cone_margin: float = 1e-3

    def __post_init__(self):
        n = self.initial.dimension
        if not (0 <= self.j < self.k <= n - 1):
            raise ProbeError(f"need 0 <= j < k <= n-1, got j={self.j}, k={self.k}, n={n}")
        if self.method not in METHODS:
            raise ProbeError(f"unknown method {self.method!r}; choose from {METHODS}")
        L = self.initial.band_limit
        if L < 1:
            raise ProbeError("band limit must be at least 1")
        if self.resolution is None:
            self.resolution = 4 * (L + 1)
        if self.resolution < 2 * L + 2:
            raise ProbeError(f"resolution {self.resolution} below 2L+2")

    @property
    def dimension(self) -> int:
        return self.initial.dimension


@dataclass
class ProbeResult:
    final_shape: RadialShape
    history: list[tuple[int, float, float, float]]
    objective: float
    mean_radius: float
    radius_spread: float
    defect: float
    mean_q: float
    predicted_mean: float
    area: float
    target_area: float
    feasible: bool
    evaluations: int
    wall_clock: float
    verdict: str

    @property
    def sphere_reached(self) -> bool:
        return self.verdict == "sphere-reached"

    def to_dict(self, timing: bool = False) -> dict:
        d = asdict(self)
        d["final_shape"] = self.final_shape.to_dict()
        d["history"] = [list(row) for row in self.history]
        if not timing:
            d.pop("wall_clock")
        return d

    def history_csv(self) -> str:
        lines = ["iteration,J,radius_spread,defect"]
        lines += [f"{i},{J!r},{s!r},{d!r}" for i, J, s, d in self.history]
        return "\n".join(lines) + "\n"


@dataclass
class ConstancyScan:
    mean: float
    min: float
    max: float
    defect: float
    hk_positive: bool
    hj_positive: bool
    in_cone: bool
    valid_nodes: int = field(default=0)


def sphere_radius_for_area(dimension: int, area: float) -> float:
    """Radius of the centred sphere with the given area."""
    sphere = 2 * np.pi if dimension == 2 else 4 * np.pi
    return float(np.arcsinh((area / sphere) ** (1.0 / (dimension - 1))))


class _Evaluator:
    """Evaluates shapes on a fixed grid with cached basis matrices."""

    def __init__(self, dimension: int, L: int, resolution: int):
        self.dimension = dimension
        self.grid = make_grid(dimension, resolution)
        self.basis = node_basis(dimension, L, resolution)
        self.phi0 = constant_coefficient_scale(dimension)

    def fields(self, c: np.ndarray) -> dict[str, np.ndarray]:
        return {k: B @ c for k, B in self.basis.items()}

    def geometry(self, c: np.ndarray):
        return geometry_from_fields(self.grid, self.fields(c))

    def area(self, c: np.ndarray) -> float:
        f = {k: self.basis[k] @ c for k in (("f", "t") if self.dimension == 2 else ("f", "t", "p"))}
        r = f["f"]
        s2 = np.sinh(r) ** 2
        if self.dimension == 2:
            dens = np.sqrt(f["t"] ** 2 + s2)
        else:
            st = np.sin(self.grid.angles[0])
            dens = np.sqrt(s2 * (s2 + f["t"] ** 2 + (f["p"] / st) ** 2))
        return float(dens @ self.grid.weights)

    def solve_constant(self, rest: np.ndarray, area: float) -> float | None:
        """Constant coefficient giving total area ``area``; ``None`` if out of range."""
        c = np.concatenate([[0.0], rest])
        r_rest = self.basis["f"] @ c
        lo = (-r_rest.min() + 1e-9) / self.phi0
        hi = (RADIUS_CAP - r_rest.max()) / self.phi0
        if hi <= lo:
            return None

        def f(c0):
            c[0] = c0
            return self.area(c) - area

        flo, fhi = f(lo), f(hi)
        if flo > 0 or fhi < 0:
            return None
        return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _q_field(geo, k: int, j: int):
    sig = elementary_symmetric(geo.principal)
    m = geo.m
    H = sig / np.array([comb(m, i) for i in range(m + 1)])
    return geo.V * H[:, k] / H[:, j], sig, H


def constancy_scan(shape: RadialShape, k: int, j: int = 0, resolution: int | None = None) -> ConstancyScan:
    """Extremal statistics of ``Q = V H_k / H_j`` over the nodes.

    ``Q`` is reported on the nodes where ``H_j > 0``; cone and positivity
    failures are flagged instead of raised.
    """
    if resolution is None:
        resolution = 4 * (shape.band_limit + 1)
    ev = _Evaluator(shape.dimension, shape.band_limit, resolution)
    geo = ev.geometry(shape.coefficients)
    with np.errstate(divide="ignore", invalid="ignore"):
        Q, sig, H = _q_field(geo, k, j)
    ok = H[:, j] > 0
    Qv = Q[ok]
    in_cone = bool(np.all(sig[:, 1 : k + 1] > 0))
    if Qv.size == 0:
        return ConstancyScan(np.nan, np.nan, np.nan, np.nan, False, False, in_cone, 0)
    w = geo.area_weights[ok]
    mean = float(Qv @ w / w.sum())
    return ConstancyScan(
        mean,
        float(Qv.min()),
        float(Qv.max()),
        float((Qv.max() - Qv.min()) / abs(mean)),
        bool(np.all(H[:, k] > 0)),
        bool(np.all(H[:, j] > 0)),
        in_cone,
        int(ok.sum()),
    )


class _Problem:
    def __init__(self, config: ProbeConfig):
        self.cfg = config
        shape = config.initial
        self.ev = _Evaluator(shape.dimension, shape.band_limit, config.resolution)
        self.c_init = np.array(shape.coefficients)
        self.target_area = config.target_area if config.target_area is not None else self.ev.area(self.c_init)
        self.n_res = self.ev.grid.size + config.k + 1
        self.evaluations = 0
        self.best = (np.inf, None)
        self.history: list[tuple[int, float, float, float]] = []

    def coefficients(self, x: np.ndarray) -> np.ndarray | None:
        c0 = self.ev.solve_constant(x, self.target_area)
        if c0 is None:
            return None
        return np.concatenate([[c0], x])

    def residuals(self, x: np.ndarray) -> np.ndarray:
        self.evaluations += 1
        cfg = self.cfg
        c = self.coefficients(x)
        if c is None:
            return np.full(self.n_res, _INFEASIBLE)
        try:
            geo = self.ev.geometry(c)
        except (ValueError, np.linalg.LinAlgError):
            return np.full(self.n_res, _INFEASIBLE)
        with np.errstate(divide="ignore", invalid="ignore"):
            Q, sig, _ = _q_field(geo, cfg.k, cfg.j)
        if not np.all(np.isfinite(Q)):
            return np.full(self.n_res, _INFEASIBLE)
        w = geo.area_weights / geo.area
        mean = float(Q @ w)
        res = np.sqrt(w) * (Q - mean)
        # hinge penalties keep candidates star-shaped and inside the cone
        pen = [np.sqrt(cfg.positivity_weight) * max(0.0, cfg.cone_margin - geo.r.min())]
        for i in range(1, cfg.k + 1):
            pen.append(np.sqrt(cfg.cone_weight) * max(0.0, cfg.cone_margin - sig[:, i].min()))
        out = np.concatenate([res, pen])
        J = float(out @ out)
        if J < self.best[0]:
            self.best = (J, c)
            spread = _weighted_spread(geo)
            self.history.append((self.evaluations, J, spread, float((Q.max() - Q.min()) / abs(mean))))
        return out

    def objective(self, x: np.ndarray) -> float:
        res = self.residuals(x)
        return float(res @ res)


def _weighted_spread(geo) -> float:
    w = geo.grid.weights / geo.grid.weights.sum()
    mean = geo.r @ w
    return float(np.sqrt(((geo.r - mean) ** 2) @ w) / mean)


def objective(shape: RadialShape, config: ProbeConfig) -> float:
    """Penalized area-weighted variance of ``Q`` for ``shape`` (no area re-solve)."""
    prob = _Problem(config)
    c = np.array(shape.coefficients)
    try:
        geo = prob.ev.geometry(c)
    except ValueError:
        return _INFEASIBLE**2 * prob.n_res
    with np.errstate(divide="ignore", invalid="ignore"):
        Q, sig, _ = _q_field(geo, config.k, config.j)
    if not np.all(np.isfinite(Q)):
        return _INFEASIBLE**2 * prob.n_res
    w = geo.area_weights / geo.area
    mean = Q @ w
    J = float(((Q - mean) ** 2) @ w)
    J += config.positivity_weight * max(0.0, config.cone_margin - geo.r.min()) ** 2
    for i in range(1, config.k + 1):
        J += config.cone_weight * max(0.0, config.cone_margin - sig[:, i].min()) ** 2
    return J


def run_probe(config: ProbeConfig) -> ProbeResult:
    """Minimize the constancy defect of ``Q`` at fixed area.

    Stops when ``J`` drops below ``objective_tol`` or the evaluation budget is
    spent.  The verdict is ``sphere-reached`` iff the weighted radius spread
    ``std(r)/mean(r)`` is below ``spread_tol`` and ``J < objective_tol``;
    otherwise ``inconclusive``.
    """
    start = time.perf_counter()
    prob = _Problem(config)
    ev = prob.ev
    c_start = prob.coefficients(prob.c_init[1:])
    if c_start is None:
        raise ProbeError("initial shape cannot meet the area constraint")
    try:
        geo0 = ev.geometry(prob.c_init)
    except ValueError as exc:
        raise ProbeError(f"initial shape infeasible: {exc}") from exc
    sig0 = elementary_symmetric(geo0.principal)
    if not np.all(sig0[:, 1 : config.k + 1] > 0):
        raise ProbeError("initial shape is not k-convex at every node")

    x0 = prob.c_init[1:]
    budget = config.max_evaluations
    res0 = prob.residuals(x0)
    if float(res0 @ res0) >= config.objective_tol:
        if config.method == "gauss-newton":
            x = x0
            # restarts refresh the finite-difference Jacobian after stalls
            while prob.evaluations < budget and prob.best[0] >= config.objective_tol:
                before = prob.evaluations
                sol = least_squares(
                    prob.residuals,
                    x,
                    method="trf",
                    x_scale="jac",
                    xtol=config.step_tol,
                    ftol=1e-15,
                    gtol=1e-15,
                    max_nfev=max(1, (budget - prob.evaluations) // (x.size + 1)),
                )
                x = prob.best[1][1:]
                if prob.evaluations - before <= x.size + 2:
                    break
        elif config.method == "simplex":
            minimize(
                prob.objective,
                x0,
                method="Nelder-Mead",
                options={
                    "maxfev": budget - prob.evaluations,
                    "xatol": config.step_tol,
                    "fatol": config.objective_tol * 1e-3,
                    "adaptive": True,
                    "initial_simplex": x0 + np.vstack([np.zeros(x0.size), 0.01 * np.eye(x0.size)]),
                },
            )
        else:
            minimize(
                prob.objective,
                x0,
                method="BFGS",
                jac="2-point",
                options={"maxiter": budget // (x0.size + 1), "gtol": 1e-14},
            )
    J, c = prob.best
    final = RadialShape(config.dimension, config.initial.band_limit, c, "probe optimum")
    geo = ev.geometry(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        Q, sig, _ = _q_field(geo, config.k, config.j)
    w = geo.area_weights / geo.area
    mean = float(Q @ w)
    spread = _weighted_spread(geo)
    rho = sphere_radius_for_area(config.dimension, prob.target_area)
    target_mean = float(np.cosh(rho) / np.tanh(rho) ** (config.k - config.j))
    feasible = bool(np.all(sig[:, 1 : config.k + 1] > 0) and geo.r.min() > 0)
    verdict = "sphere-reached" if (J < config.objective_tol and spread < config.spread_tol and feasible) else "inconclusive"
    result = ProbeResult(
        final_shape=final,
        history=prob.history,
        objective=J,
        mean_radius=float(geo.r @ geo.grid.weights / geo.grid.weights.sum()),
        radius_spread=spread,
        defect=float((Q.max() - Q.min()) / abs(mean)),
        mean_q=mean,
        predicted_mean=target_mean,
        area=geo.area,
        target_area=prob.target_area,
        feasible=feasible,
        evaluations=prob.evaluations,
        wall_clock=time.perf_counter() - start,
        verdict=verdict,
    )
    log.info("probe %s after %d evaluations, J=%.3e", verdict, prob.evaluations, J)
    return result
