"""Run reports (JSON, schema ``report/v1``) and long-format plot data."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

SCHEMA = "report/v1"
PLOT_COLUMNS = ("fixture", "n", "quantity", "value")


@dataclass
class RunReport:
    experiment: str
    config: dict
    seed: int
    results: list = field(default_factory=list)
    exhaustive: bool = True
    violations: list = field(default_factory=list)
    status: int = 0
    plot_rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "version": __version__,
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "results": self.results,
            "summary": self.summary,
            "exhaustive": self.exhaustive,
            "violations": self.violations,
            "status": self.status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def emit_plotdata(report: RunReport) -> str:
    """Tidy CSV with one ``(fixture, n, quantity, value)`` row per measurement."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    for row in sorted(report.plot_rows, key=lambda r: tuple(str(x) for x in r)):
        w.writerow(row)
    return buf.getvalue()


def write_outputs(report: RunReport, out_dir: Path, tables: dict[str, str] | None = None,
                  timing: dict | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json())
    (out_dir / "plotdata.csv").write_text(emit_plotdata(report))
    for name, text in sorted((tables or {}).items()):
        (out_dir / name).write_text(text)
    if timing is not None:
        (out_dir / "timing.json").write_text(json.dumps(timing, sort_keys=True, indent=1) + "\n")
