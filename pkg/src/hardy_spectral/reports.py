"""Bound reports and deterministic JSON/CSV output."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["BoundReport", "to_jsonable", "dumps", "SIG_DIGITS"]

SIG_DIGITS = 12


@dataclass
class BoundReport:
    """One evaluated inequality: bound vs. reference value.

    ``passed`` is None for informational reports (vacuous cases, or bounds
    whose constant is not known numerically).
    """

    name: str
    bound_value: float
    reference_value: float
    passed: bool | None
    parameters: dict[str, Any] = field(default_factory=dict)
    tolerances: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        if self.reference_value == 0 or not np.isfinite(self.reference_value):
            return math.nan
        return self.bound_value / self.reference_value

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "bound_value": self.bound_value,
            "reference_value": self.reference_value,
            "ratio": self.ratio,
            "pass": self.passed,
            "parameters": self.parameters,
            "tolerances": self.tolerances,
        }
        out.update(self.details)
        return to_jsonable(out)

    def summary(self) -> str:
        status = {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]
        return f"[{status}] {self.name}: bound={_fmt(self.bound_value)} reference={_fmt(self.reference_value)}"


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, (int, float, np.floating)) else str(x)


def _float(x: float):
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIG_DIGITS}g}")


def to_jsonable(obj):
    """Round floats to 12 significant digits; numpy scalars/arrays to Python."""
    if isinstance(obj, BoundReport):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"
