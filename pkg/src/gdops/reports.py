"""Report containers shared by the harnesses."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np


def jsonable(value: Any) -> Any:
    """Convert numpy values and nested containers into plain JSON data."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isnan(v) or math.isinf(v):
            return None
        return v
    if hasattr(value, "to_dict"):
        return value.to_dict()
    return value


@dataclass
class CheckReport:
    """Outcome of a property check.

    ``worst_gap`` is the smallest slack seen (negative means a violation) and
    ``witness`` the input that produced it.
    """

    name: str
    passed: bool
    samples: int = 0
    seed: int | None = None
    worst_gap: float = math.inf
    witness: Any = None
    residuals: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return jsonable({
            "name": self.name,
            "pass": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "worst_gap": self.worst_gap,
            "witness": self.witness,
            "residuals": self.residuals,
            "details": self.details,
        })

    def __bool__(self) -> bool:
        return bool(self.passed)


def write_csv(path: str | Path, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(header))
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
