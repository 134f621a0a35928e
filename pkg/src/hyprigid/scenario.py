"""Scenario and probe configuration files (JSON, ``"schema": 1``)."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .surface.shape import (
    RadialShape,
    load_shape,
    off_center_sphere_shape,
    perturb_sphere,
    sphere_shape,
)

__all__ = [
    "CHECKS",
    "ConfigError",
    "SphereSource",
    "PerturbedSource",
    "InlineSource",
    "FileSource",
    "Scenario",
    "ProbeFile",
    "load_config",
    "build_shape",
]

CHECKS = (
    "minkowski_pointwise",
    "minkowski_integral",
    "weighted_minkowski",
    "weighted_minkowski_inequality",
    "heintze_karcher",
    "theorem_chains",
    "newton_maclaurin_scan",
)


class ConfigError(ValueError):
    """Malformed configuration; the message starts with ``path:line:``."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SphereSource(_Strict):
    kind: Literal["sphere"]
    rho: float = Field(gt=0)
    center_distance: float = Field(default=0.0, ge=0)
    center_direction: list[float] | None = None
    band_limit: int = Field(default=16, ge=0)


class PerturbedSource(_Strict):
    kind: Literal["perturbed"]
    rho: float = Field(gt=0)
    amplitude: float = Field(ge=0)
    seed: int = 0
    band_limit: int = Field(default=4, ge=1)
    convex: bool = True


class InlineSource(_Strict):
    kind: Literal["inline"]
    band_limit: int = Field(ge=0)
    coefficients: list[list[float]]
    description: str = ""


class FileSource(_Strict):
    kind: Literal["file"]
    path: str


ShapeSource = Annotated[
    Union[SphereSource, PerturbedSource, InlineSource, FileSource], Field(discriminator="kind")
]


class Outputs(_Strict):
    json_name: str | None = Field(default=None, alias="json")
    csv_name: str | None = Field(default=None, alias="csv")
    history_csv: str | None = None


class _Base(_Strict):
    schema_version: Literal[1] = Field(alias="schema")
    name: str = Field(pattern=r"^[A-Za-z0-9_.-]+$")
    dimension: Literal[2, 3]
    shape: ShapeSource
    resolution: int | None = Field(default=None, ge=2)
    seed: int | None = None
    outputs: Outputs = Outputs()


class Scenario(_Base):
    checks: list[Literal[CHECKS]] = list(CHECKS)  # type: ignore[valid-type]
    k: int | None = None
    j: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _indices(self):
        m = self.dimension - 1
        if self.k is not None and not (1 <= self.k <= m):
            raise ValueError(f"k={self.k} must lie in [1, n-1] = [1, {m}]")
        kmin = self.k if self.k is not None else 1
        if self.j >= kmin and "theorem_chains" in self.checks:
            raise ValueError(f"j={self.j} must be smaller than k={kmin}")
        return self

    @property
    def ks(self) -> list[int]:
        return [self.k] if self.k is not None else list(range(1, self.dimension))


class ProbeFile(_Base):
    k: int
    j: int = Field(default=0, ge=0)
    method: Literal["gauss-newton", "simplex", "gradient"] = "gauss-newton"
    max_evaluations: int = Field(default=10_000, ge=1)
    objective_tol: float = Field(default=1e-8, gt=0)
    spread_tol: float = Field(default=1e-3, gt=0)
    target_area: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _indices(self):
        if not (0 <= self.j < self.k <= self.dimension - 1):
            raise ValueError(f"need 0 <= j < k <= n-1, got j={self.j}, k={self.k}")
        return self


def _line_of(text: str, loc: tuple) -> int:
    keys = [str(x) for x in loc if isinstance(x, str)]
    for key in reversed(keys):
        idx = text.find(f'"{key}"')
        if idx >= 0:
            return text.count("\n", 0, idx) + 1
    return 1


def load_config(path, model: type[_Base]):
    """Parse and validate ``path``; errors become :class:`ConfigError`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}:0: cannot read: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        where = ".".join(str(x) for x in err["loc"]) or "<root>"
        raise ConfigError(f"{path}:{_line_of(text, err['loc'])}: {where}: {err['msg']}") from exc


def build_shape(cfg: _Base, base_dir=None) -> RadialShape:
    """Construct the shape described by ``cfg.shape`` (``cfg.seed`` overrides a perturbation seed)."""
    src = cfg.shape
    n = cfg.dimension
    if isinstance(src, SphereSource):
        if src.center_distance == 0:
            return sphere_shape(n, src.rho, src.band_limit)
        return off_center_sphere_shape(n, src.rho, src.center_distance, src.band_limit, src.center_direction)
    if isinstance(src, PerturbedSource):
        seed = cfg.seed if cfg.seed is not None else src.seed
        return perturb_sphere(src.rho, src.amplitude, seed, src.band_limit, n, convex=src.convex)
    if isinstance(src, InlineSource):
        shape = RadialShape.from_dict(
            {
                "dimension": n,
                "band_limit": src.band_limit,
                "coefficients": src.coefficients,
                "description": src.description,
            }
        )
        return shape
    path = Path(src.path)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    shape = load_shape(path)
    if shape.dimension != n:
        raise ValueError(f"shape file has dimension {shape.dimension}, scenario expects {n}")
    return shape
