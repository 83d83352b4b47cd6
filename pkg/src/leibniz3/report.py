"""Residual reports and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

SCHEMA_VERSION = 1
TIMING_KEYS = ("wall_time",)


@dataclass
class CaseResult:
    """One verification case.

    ``max_residual`` and ``scale`` come from the worst sample, i.e. the one
    with the largest ``|residual| / max(1, scale)``; ``scale`` is already
    floored at 1. With ``expect == "holds"`` the case passes when
    ``max_residual <= tolerance * scale``; with ``expect == "violation"`` it
    passes when that inequality fails.
    """

    case: str
    operator: str
    functions: list[str]
    sample_count: int
    max_residual: float
    scale: float
    tolerance: float
    expect: str = "holds"
    measured: Optional[dict] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        within = self.max_residual <= self.tolerance * self.scale
        return within if self.expect == "holds" else not within

    def as_dict(self) -> dict:
        out = {
            "case": self.case,
            "operator": self.operator,
            "functions": list(self.functions),
            "sample_count": self.sample_count,
            "max_residual": self.max_residual,
            "scale": self.scale,
            "tolerance": self.tolerance,
            "expect": self.expect,
            "pass": self.passed,
        }
        if self.measured is not None:
            out["measured"] = self.measured
        if self.note:
            out["note"] = self.note
        return out


class Worst:
    """Track the sample with the largest scaled residual."""

    def __init__(self):
        self.count = 0
        self.residual = 0.0
        self.scale = 1.0

    def add(self, residual: float, scale: float = 1.0) -> None:
        self.count += 1
        s = max(1.0, abs(scale))
        if self.count == 1 or abs(residual) / s > self.residual / self.scale:
            self.residual, self.scale = abs(residual), s

    def add_residual(self, r) -> None:
        self.add(r.value, r.scale)

    def case(self, case: str, operator: str, functions: Iterable[str], tolerance: float,
             **kw) -> CaseResult:
        return CaseResult(case, operator, list(functions), self.count, self.residual,
                          self.scale, tolerance, **kw)


@dataclass
class ResidualReport:
    suite: str
    seed: int
    cases: list[CaseResult] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "cases": [c.as_dict() for c in self.cases],
            "seed": self.seed,
            "wall_time": self.wall_time,
        }


def _fmt_float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        return "null"
    return format(v, ".16e")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def run_document(reports: list[ResidualReport], seed: int, tolerance: float) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "seed": seed,
        "tolerance": tolerance,
        "pass": all(r.passed for r in reports),
        "reports": [r.as_dict() for r in reports],
    }


def to_csv(reports: list[ResidualReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "case", "operator", "functions", "sample_count", "max_residual",
                "scale", "tolerance", "expect", "pass", "measured", "seed", "wall_time"])
    for r in reports:
        for c in r.cases:
            measured = "" if c.measured is None else json.dumps(c.measured, sort_keys=True)
            w.writerow([r.suite, c.case, c.operator, ";".join(c.functions), c.sample_count,
                        _fmt_float(c.max_residual), _fmt_float(c.scale),
                        _fmt_float(c.tolerance), c.expect, c.passed, measured, r.seed,
                        _fmt_float(r.wall_time)])
    return buf.getvalue()


def strip_timing(doc):
    """Copy of a parsed report document without timing fields."""
    if isinstance(doc, dict):
        return {k: strip_timing(v) for k, v in doc.items() if k not in TIMING_KEYS}
    if isinstance(doc, list):
        return [strip_timing(v) for v in doc]
    return doc
