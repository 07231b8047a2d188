from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

STATUSES = ("converged", "max_iter", "infeasible")


def _num(x: float):
    x = float(x)
    if math.isfinite(x):
        return x + 0.0    # drops the sign of zero
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _den(x) -> float:
    return float(x)


@dataclass
class SolveReport:
    """Outcome of a solver run.

    ``witness_w`` is the element of ``co A(y)`` certifying the solution,
    ``trace`` the ``(iteration, residual)`` pairs recorded during the run and
    ``info`` solver-specific details (stage residuals, radius, fallbacks).
    """

    y: np.ndarray
    residual: float
    iterations: int
    witness_w: np.ndarray
    trace: list = field(default_factory=list)
    status: str = "max_iter"
    method: str = "extragradient"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        self.y = np.asarray(self.y, dtype=float)
        self.witness_w = np.asarray(self.witness_w, dtype=float)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_record(self) -> dict:
        return {
            "record": "solve_report",
            "method": self.method,
            "status": self.status,
            "y": [_num(v) for v in self.y],
            "residual": _num(self.residual),
            "iterations": int(self.iterations),
            "witness_w": [_num(v) for v in self.witness_w],
            "trace": [[int(k), _num(r)] for k, r in self.trace],
            "info": _plain(self.info),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SolveReport":
        if rec.get("record") != "solve_report":
            raise ValueError("not a solve_report record")
        return cls(
            y=np.array(rec["y"], dtype=float),
            residual=_den(rec["residual"]),
            iterations=int(rec["iterations"]),
            witness_w=np.array(rec["witness_w"], dtype=float),
            trace=[(int(k), _den(r)) for k, r in rec["trace"]],
            status=rec["status"],
            method=rec["method"],
            info=rec.get("info", {}),
        )

    def __eq__(self, other):
        if not isinstance(other, SolveReport):
            return NotImplemented
        return self.to_record() == other.to_record()


def _plain(obj):
    """Convert numpy scalars and arrays nested in ``obj`` to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj
