"""Report records and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import __version__
from .claims import CLAIMS
from .errors import InvalidParameterError

CSV_COLUMNS = ["claim_anchor", "kind", "exact_flag", "value", "expected", "tolerance", "verdict", "seed"]

PASS, FAIL, ERROR = "pass", "fail", "error"


def _plain(x: Any):
    """JSON/CSV friendly form: rationals as 'p/q' strings, floats by shortest repr."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(x)
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if hasattr(x, "item"):  # numpy scalar
        return _plain(x.item())
    return x


@dataclass
class Record:
    claim_anchor: str
    kind: str
    exact: bool
    value: Any
    expected: Any = None
    tolerance: float = 0.0
    verdict: str = PASS
    detail: str = ""

    def __post_init__(self):
        if self.claim_anchor not in CLAIMS:
            raise InvalidParameterError(f"unknown claim anchor {self.claim_anchor!r}")
        if self.exact:
            self.tolerance = 0.0
        if self.verdict not in (PASS, FAIL, ERROR):
            raise InvalidParameterError(f"bad verdict {self.verdict!r}")

    @classmethod
    def check(cls, anchor: str, kind: str, ok: bool, value, expected=None, *,
              exact: bool = True, tolerance: float = 0.0, detail: str = "") -> "Record":
        return cls(anchor, kind, exact, value, expected, tolerance, PASS if ok else FAIL, detail)

    @classmethod
    def error(cls, kind: str, exc: BaseException) -> "Record":
        code = getattr(exc, "code", type(exc).__name__)
        return cls("runner-error", kind, True, code, None, 0.0, ERROR, str(exc))

    def to_dict(self) -> dict:
        return {
            "claim_anchor": self.claim_anchor,
            "kind": self.kind,
            "exact_flag": self.exact,
            "value": _plain(self.value),
            "expected": _plain(self.expected),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "detail": self.detail,
        }


@dataclass
class Report:
    config: dict
    seed: int
    records: list[Record] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    timestamp: str | None = None

    def add(self, record: Record) -> None:
        self.records.append(record)

    def extend(self, records) -> None:
        self.records.extend(records)

    @property
    def passed(self) -> bool:
        return all(r.verdict == PASS for r in self.records)

    def failures(self) -> list[Record]:
        return [r for r in self.records if r.verdict != PASS]

    def to_dict(self) -> dict:
        return {
            "config": _plain(self.config),
            "records": [r.to_dict() for r in self.records],
            "meta": {
                "version": __version__,
                "seed": self.seed,
                "notes": list(self.notes),
                "all_passed": self.passed,
                "timestamp": self.timestamp,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.records:
            d = r.to_dict()
            row = [d["claim_anchor"], d["kind"], str(d["exact_flag"]).lower(),
                   _cell(d["value"]), _cell(d["expected"]), repr(float(d["tolerance"])),
                   d["verdict"], self.seed]
            writer.writerow(row)
        return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(float(v))
    if isinstance(v, list):
        return json.dumps(v)
    return str(v)


def emit_report(report: Report, fmt: str = "json", path: str | Path | None = None,
                timestamp: bool = True) -> str:
    """Serialize ``report``; writes to ``path`` when given and returns the text."""
    if fmt not in ("json", "csv"):
        raise InvalidParameterError(f"unknown report format {fmt!r}")
    if timestamp and report.timestamp is None:
        report.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = report.to_json() if fmt == "json" else report.to_csv()
    if path is not None:
        Path(path).write_text(text)
    return text
