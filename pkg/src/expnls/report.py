"""Experiment reports and their on-disk artifacts (CSV table, JSON report, gnuplot stub)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .evolution import DiagnosticsRecord

DIAGNOSTIC_UNITS = {
    "t": "time",
    "mass": "|u|^2 length^2",
    "hamiltonian": "energy",
    "grad_l2": "|u|",
    "l4_norm": "|u| length^(1/2)",
    "linf": "|u|",
    "boundary_band_mass": "|u|^2 length^2",
}


@dataclass(frozen=True)
class Verdict:
    name: str
    criterion: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentReport:
    experiment: str
    config: dict[str, Any]
    columns: list[str] = field(default_factory=list)
    rows: list[list[float]] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    wall_clock_s: float = 0.0
    artifacts: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def diagnostics_table(series: Sequence[DiagnosticsRecord]) -> tuple[list[str], list[list[float]]]:
    radii = sorted(series[0].localized_mass) if series else []
    names = ["t", "mass", "hamiltonian", "grad_l2", "l4_norm", "linf"]
    header = [f"{n} [{DIAGNOSTIC_UNITS[n]}]" for n in names]
    header += [f"localized_mass_R={R:g} [{DIAGNOSTIC_UNITS['mass']}]" for R in radii]
    header.append(f"boundary_band_mass [{DIAGNOSTIC_UNITS['boundary_band_mass']}]")
    rows = []
    for rec in series:
        row = [getattr(rec, n) for n in names]
        row += [rec.localized_mass[R] for R in radii]
        row.append(rec.boundary_band_mass)
        rows.append(row)
    return header, rows


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else format(x, ".17g")
    return str(x)


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def write_gnuplot_stub(path: Path, csv_name: str, columns: Sequence[str]) -> Path:
    lines = [
        "# gnuplot script stub; run: gnuplot -p " + path.name,
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel " + json.dumps(columns[0]),
    ]
    plots = [f"'{csv_name}' using 1:{i + 1} with lines" for i in range(1, len(columns))]
    lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n")
    return path


def emit(report: ExperimentReport, out_dir: Path) -> ExperimentReport:
    """Write diagnostics.csv, plot.gp and report.json into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_csv(out_dir / "diagnostics.csv", report.columns, report.rows)
    gp = write_gnuplot_stub(out_dir / "plot.gp", csv_path.name, report.columns)
    report.artifacts.extend([str(csv_path), str(gp)])
    rep_path = out_dir / "report.json"
    report.artifacts.append(str(rep_path))
    rep_path.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True, default=_json_default) + "\n")
    return report


def _json_default(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")
