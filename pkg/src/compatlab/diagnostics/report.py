"""Gap reports and their CSV/JSON writers."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .gap import GapEntry

CSV_COLUMNS = ("alpha", "h_id", "mse_y", "mse_xy", "gap", "se", "ci_lo", "ci_hi", "decision")


@dataclass
class GapReport:
    entries: list
    provenance: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    kind: str = "compatibility"

    @property
    def passed(self) -> bool:
        return not any(e.rejected for e in self.entries)

    @property
    def rejections(self) -> list:
        return [e for e in self.entries if e.rejected]

    def entry(self, alpha, h_id) -> GapEntry:
        for e in self.entries:
            if e.alpha == str(alpha) and e.h_id == str(h_id):
                return e
        raise KeyError((alpha, h_id))

    def as_dict(self) -> dict:
        return {"kind": self.kind, "passed": self.passed, "provenance": self.provenance,
                "config": self.config, "entries": [asdict(e) for e in self.entries]}


def write_csv(report: GapReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for e in report.entries:
            row = asdict(e)
            w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in CSV_COLUMNS])
    return path


def write_json(report: GapReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True, default=str) + "\n")
    return path
