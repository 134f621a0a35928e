"""Residual reports and their JSON / CSV serialization.

Floats are written with ``repr`` (shortest round-trip form), so identical
inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

__all__ = [
    "PASS",
    "FAIL",
    "EQUALITY",
    "HYPOTHESIS_NOT_MET",
    "DIAGNOSTIC",
    "CheckEntry",
    "ResidualReport",
    "clean_float",
    "dumps",
]

PASS = "pass"
FAIL = "fail"
EQUALITY = "equality-detected"
HYPOTHESIS_NOT_MET = "hypothesis-not-met"
DIAGNOSTIC = "diagnostic"

CSV_COLUMNS = ["name", "lhs", "rhs", "residual", "rel_residual", "tolerance", "verdict", "anchor"]


def clean_float(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _clean(obj):
    if isinstance(obj, float):
        return clean_float(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


@dataclass
class CheckEntry:
    """One identity, inequality or diagnostic with its verdict.

    For inequalities ``residual = lhs - rhs`` is the margin of ``lhs >= rhs``.
    """

    name: str
    lhs: float | None
    rhs: float | None
    residual: float | None
    rel_residual: float | None
    tolerance: float
    verdict: str
    anchor: str
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict != FAIL


@dataclass
class ResidualReport:
    entries: list[CheckEntry] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, entry) -> None:
        if isinstance(entry, CheckEntry):
            self.entries.append(entry)
        else:
            self.entries.extend(entry)

    def __getitem__(self, name: str) -> CheckEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def failed(self) -> list[CheckEntry]:
        return [e for e in self.entries if e.verdict == FAIL]

    @property
    def passed(self) -> bool:
        return not self.failed

    def to_dict(self) -> dict:
        return {"meta": self.meta, "checks": [asdict(e) for e in self.entries]}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for e in self.entries:
            row = []
            for col in CSV_COLUMNS:
                v = getattr(e, col)
                if isinstance(v, float) or v is None:
                    v = clean_float(v)
                    v = "" if v is None else repr(v)
                row.append(v)
            w.writerow(row)
        return buf.getvalue()

    def write(self, json_path=None, csv_path=None) -> None:
        if json_path is not None:
            Path(json_path).write_text(self.to_json())
        if csv_path is not None:
            Path(csv_path).write_text(self.to_csv())
