"""Deterministic serialization of reports: human tables, JSON-lines records, CSV."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from ..classes import ClassReport
from ..solver.report import SolveReport, _num

FORMATS = ("table", "records", "csv")


@dataclass
class ScanReport:
    """Residual of the inequality at a list of candidate points."""

    points: np.ndarray
    residuals: list
    feasible: list

    def to_record(self) -> dict:
        return {"record": "residual_scan",
                "points": [[_num(v) for v in p] for p in self.points],
                "residuals": [_num(r) for r in self.residuals],
                "feasible": [bool(b) for b in self.feasible]}

    @classmethod
    def from_record(cls, rec: dict) -> "ScanReport":
        if rec.get("record") != "residual_scan":
            raise ValueError("not a residual_scan record")
        return cls(np.array(rec["points"], dtype=float), [float(r) for r in rec["residuals"]],
                   list(rec["feasible"]))

    def __eq__(self, other):
        if not isinstance(other, ScanReport):
            return NotImplemented
        return self.to_record() == other.to_record()


_PARSERS = {"solve_report": SolveReport.from_record, "class_report": ClassReport.from_record,
            "residual_scan": ScanReport.from_record}


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x) + 0.0:.6g}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _table(rows) -> str:
    w = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{w}}  {v}" for k, v in rows) + "\n"


def record_line(report) -> str:
    return json.dumps(report.to_record(), sort_keys=True, separators=(",", ":")) + "\n"


def emit_report(report, format: str = "table") -> str:
    """Serialize one report.

    ``records`` is a single sorted-key JSON line; ``csv`` carries the
    iteration trace of a solve (a one-row summary for other reports).
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")
    if format == "records":
        return record_line(report)
    buf = io.StringIO()
    if isinstance(report, SolveReport):
        if format == "table":
            rows = [("method", report.method), ("status", report.status), ("iterations", report.iterations),
                    ("residual", _fmt(report.residual)), ("y", _fmt(report.y)), ("witness_w", _fmt(report.witness_w))]
            for k in ("natural_residual", "radius", "mu", "mu_gap", "polish"):
                if k in report.info:
                    rows.append((k, _fmt(report.info[k])))
            return _table(rows)
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["iteration", "residual"])
        for k, r in report.trace:
            wr.writerow([int(k), repr(float(r))])
        return buf.getvalue()
    if isinstance(report, ClassReport):
        if format == "table":
            rows = [("check", report.check), ("verdict", report.verdict), ("margin", _fmt(report.margin)),
                    ("samples", report.samples_used), ("tolerance", _fmt(report.tolerance))]
            if report.witness is not None:
                rows.append(("witness", json.dumps(report.to_record()["witness"], sort_keys=True)))
            rows.extend(("note", n) for n in report.notes)
            return _table(rows)
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["check", "verdict", "margin", "samples_used"])
        wr.writerow([report.check, report.verdict, repr(float(report.margin)), report.samples_used])
        return buf.getvalue()
    if isinstance(report, ScanReport):
        if format == "table":
            return _table([(_fmt(p), _fmt(r)) for p, r in zip(report.points, report.residuals)])
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow([f"y{i}" for i in range(report.points.shape[1])] + ["residual"])
        for p, r in zip(report.points, report.residuals):
            wr.writerow([repr(float(v)) for v in p] + [repr(float(r))])
        return buf.getvalue()
    raise TypeError(f"cannot emit {type(report).__name__}")


def parse_records(text: str) -> list:
    """Inverse of the ``records`` format: one report per non-empty line."""
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        try:
            out.append(_PARSERS[rec["record"]](rec))
        except KeyError as exc:
            raise ValueError(f"unknown record type {rec.get('record')!r}") from exc
    return out
