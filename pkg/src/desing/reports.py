"""Deterministic CSV and JSON report emission.

Float cells use repr (shortest round-trip form), line endings are fixed
to "\\n", and JSON keys are sorted, so identical inputs produce
byte-identical files.  Wall-clock timings never enter results.csv unless
explicitly requested; they live in timings.csv, which is excluded from
the byte-identity contract.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

RESULTS_COLUMNS = (
    "run_id", "geometry", "alpha", "lambda", "p", "h", "dt", "theta", "mode",
    "err_inf", "err_l2", "maxreg_ratio", "semigroup_bound", "wall_ms",
)

CHECK_COLUMNS = ("invariant_id", "passed", "value", "detail")


def format_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "PASS" if x else "FAIL"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(x)
    if isinstance(x, (int,)):
        return str(x)
    return str(x)


def write_csv(path, columns: Sequence[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(columns))
        for row in rows:
            writer.writerow([format_cell(c) for c in row])


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def make_run_id(prefix: str, seq: int) -> str:
    return f"{prefix}-{seq:03d}"


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named invariant."""

    invariant_id: str
    passed: bool
    value: Optional[float] = None
    detail: str = ""

    def row(self):
        return [self.invariant_id, self.passed, self.value, self.detail]


@dataclass
class ExperimentResult:
    """Everything one experiment emits: named checks plus report rows."""

    name: str
    seed: int
    checks: list = field(default_factory=list)
    columns: Sequence[str] = CHECK_COLUMNS
    rows: list = field(default_factory=list)
    timing_rows: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self):
        return [c.invariant_id for c in self.checks if not c.passed]

    def add(self, invariant_id: str, passed: bool, value=None, detail: str = "") -> None:
        self.checks.append(CheckResult(invariant_id, bool(passed),
                                       None if value is None else float(value),
                                       detail))

    def summary_payload(self) -> dict:
        return {
            "experiment": self.name,
            "seed": self.seed,
            "passed": self.passed,
            "checks": {
                c.invariant_id: {
                    "passed": c.passed,
                    "value": c.value,
                    "detail": c.detail,
                }
                for c in self.checks
            },
            **self.extra,
        }


def write_experiment(out_dir, result: ExperimentResult) -> Path:
    """Writes <out>/<experiment>/results.csv, checks.csv and summary.json.

    timings.csv is written whenever measured timings exist; results.csv
    rows carry whatever the experiment placed in them (the wall_ms column
    stays empty unless timing capture into results was requested), so the
    deterministic and the timed outputs never mix by accident.
    """
    base = Path(out_dir) / result.name
    base.mkdir(parents=True, exist_ok=True)
    rows = result.rows if result.rows else [c.row() for c in result.checks]
    columns = result.columns if result.rows else CHECK_COLUMNS
    write_csv(base / "results.csv", columns, rows)
    if result.rows and result.checks:
        write_csv(base / "checks.csv", CHECK_COLUMNS,
                  [c.row() for c in result.checks])
    if result.timing_rows:
        write_csv(base / "timings.csv", ("run_id", "wall_ms"), result.timing_rows)
    write_json(base / "summary.json", result.summary_payload())
    return base
