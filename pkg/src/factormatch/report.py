"""Verification reports and their byte-stable serializations."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

from . import __version__

SIG_DIGITS = 12


@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    graph_id: str
    lhs: float
    rhs: float
    passed: bool
    params: dict = field(default_factory=dict)
    advisory: bool = False
    witness: Any = None

    def to_dict(self) -> dict:
        out = {"check_id": self.check_id, "graph_id": self.graph_id, "params": self.params,
               "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed, "advisory": self.advisory}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class VerificationReport:
    suite: str
    records: list[CheckRecord] = field(default_factory=list)
    seeds: dict = field(default_factory=dict)
    version: str = __version__

    def add(self, check_id: str, graph_id: str, lhs: float, rhs: float, passed: bool,
            advisory: bool = False, witness: Any = None, **params: Any) -> CheckRecord:
        rec = CheckRecord(check_id, graph_id, lhs, rhs, bool(passed), params, advisory, witness)
        self.records.append(rec)
        return rec

    def extend(self, other: "VerificationReport") -> None:
        self.records.extend(other.records)
        self.seeds.update(other.seeds)

    @property
    def hard_failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed and not r.advisory]

    @property
    def summary(self) -> dict:
        hard = [r for r in self.records if not r.advisory]
        soft = [r for r in self.records if r.advisory]
        return {
            "total": len(self.records),
            "hard": len(hard),
            "hard_passed": sum(r.passed for r in hard),
            "hard_failed": sum(not r.passed for r in hard),
            "advisory": len(soft),
            "advisory_passed": sum(r.passed for r in soft),
            "advisory_failed": sum(not r.passed for r in soft),
        }

    @property
    def ok(self) -> bool:
        return not self.hard_failures

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def to_dict(self) -> dict:
        return {"suite": self.suite, "version": self.version, "seeds": self.seeds,
                "summary": self.summary, "records": [r.to_dict() for r in self.records]}


def _clean(obj: Any) -> Any:
    # fixed 12-significant-digit floats; non-finite values become strings
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
        return float(f"{obj:.{SIG_DIGITS}g}")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_clean(v) for v in items]
    if hasattr(obj, "item"):  # numpy scalars
        return _clean(obj.item())
    return str(obj)


def dumps_json(obj: Any) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _fmt(x: Any) -> str:
    x = _clean(x)
    return json.dumps(x, sort_keys=True) if isinstance(x, (dict, list)) else str(x)


def to_csv(report: VerificationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "check_id", "graph_id", "params", "lhs", "rhs", "pass", "advisory"])
    for r in report.records:
        w.writerow([report.suite, r.check_id, r.graph_id, _fmt(r.params), _fmt(r.lhs),
                    _fmt(r.rhs), int(r.passed), int(r.advisory)])
    return buf.getvalue()


def to_text(report: VerificationReport, max_failures: int = 10) -> str:
    s = report.summary
    lines = [
        f"suite: {report.suite}  version: {report.version}",
        f"checks: {s['total']}  hard: {s['hard_passed']}/{s['hard']} passed  "
        f"advisory: {s['advisory_passed']}/{s['advisory']} passed",
        f"status: {'PASS' if report.ok else 'FAIL'} (exit {report.exit_code})",
    ]
    failing = report.hard_failures
    if failing:
        lines.append(f"first {min(max_failures, len(failing))} failing records:")
        for r in failing[:max_failures]:
            lines.append(f"  {r.check_id} [{r.graph_id}] lhs={_fmt(r.lhs)} rhs={_fmt(r.rhs)} "
                         f"params={_fmt(r.params)}")
    soft = [r for r in report.records if r.advisory and not r.passed]
    if soft:
        lines.append(f"advisory misses: {len(soft)} (do not affect exit status)")
    return "\n".join(lines) + "\n"


def render(report: VerificationReport, fmt: str = "json") -> str:
    if fmt == "json":
        return dumps_json(report.to_dict())
    if fmt == "csv":
        return to_csv(report)
    if fmt in ("text", "text-summary"):
        return to_text(report)
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(report: VerificationReport, fmt: str = "json",
                destination: Optional[str] = None) -> None:
    """Write ``report`` to ``destination`` (a path) or standard output."""
    text = render(report, fmt)
    if destination is None or destination == "-":
        sys.stdout.write(text)
        return
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
