"""
Reports: config echo, one row per check, summary counts, library version.

CSV columns are fixed (:data:`CSV_COLUMNS`); JSON mirrors the rows one to
one under ``"rows"``.  Floats are written with 17 significant digits in
CSV and as round-trip floats in JSON.  Reports carry no timestamp, so two
runs with the same config and seed produce identical files.

A fixpoint report also carries the sampled trajectory.  In JSON it is the
``"trajectory"`` list; in CSV it goes to ``<stem>.trajectory.csv`` next to
the report.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from rich.console import Console
from rich.table import Table

from ..utility import error as E
from ..utility.utility import format_float

CSV_COLUMNS = ("name", "operation", "anchor", "direction", "bound", "measured", "slack", "margin",
               "passed", "details")
TRAJECTORY_COLUMNS = ("iteration", "residual")
FORMATS = ("csv", "json")


@dataclass
class Report:
    """Outcome of one CLI command.

    Attributes:
        command: the subcommand.
        config: the experiment config as run (CLI overrides applied).
        checks: the :class:`~nonexp_lab.utility.checks.Check` rows.
        summary: extra values echoed next to the counts.
        version: library version.
        trajectory: ``(iteration, residual)`` pairs of a fixpoint run.
    """
    command: str
    config: dict
    checks: list
    summary: dict = field(default_factory=dict)
    version: str = ""
    trajectory: list = None

    @property
    def passed_count(self):
        return sum(1 for c in self.checks if c.passed)

    @property
    def failed_count(self):
        return len(self.checks) - self.passed_count

    @property
    def passed(self):
        return self.failed_count == 0


def _plain(value):
    """JSON-safe copy: arrays to lists, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_float(value)
    if value is None or isinstance(value, str):
        return value
    return repr(value)


def check_row(check):
    return {
        "name": check.name,
        "operation": check.operation,
        "anchor": check.anchor,
        "direction": check.direction,
        "bound": check.bound,
        "measured": check.measured,
        "slack": check.slack,
        "margin": check.margin,
        "passed": check.passed,
    }


def report_dict(report):
    rows = []
    for check in report.checks:
        row = check_row(check)
        row["details"] = check.details
        rows.append(row)
    out = {
        "command": report.command,
        "version": report.version,
        "config": report.config,
        "summary": {"checks": len(report.checks), "passed": report.passed_count,
                    "failed": report.failed_count, **report.summary},
        "rows": rows,
    }
    if report.trajectory is not None:
        out["trajectory"] = [{"iteration": k, "residual": r} for k, r in report.trajectory]
    return _plain(out)


def _csv_cell(value):
    if isinstance(value, (dict, list)):
        return json.dumps(_plain(value), sort_keys=True)
    if isinstance(value, (bool, int, float, np.floating, np.integer)) or value is None:
        return format_float(value)
    return str(value)


def write_report(report, path, fmt="csv"):
    """Write *report* to *path* as CSV or JSON.

    Raises:
        E.ReportError: unknown format (``6000``) or write failure (``6001``).
    """
    if fmt not in FORMATS:
        raise E.ReportError(f"Unknown report format: {fmt!r}", code="6000")
    path = Path(path)
    try:
        if fmt == "json":
            with open(path, "w", encoding="utf-8") as f:
                json.dump(report_dict(report), f, indent=2, sort_keys=True)
                f.write("\n")
            return path
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(CSV_COLUMNS)
            for check in report.checks:
                row = check_row(check)
                row["details"] = check.details
                writer.writerow([_csv_cell(row[c]) for c in CSV_COLUMNS])
        if report.trajectory is not None:
            with open(path.with_suffix(".trajectory.csv"), "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(TRAJECTORY_COLUMNS)
                for k, r in report.trajectory:
                    writer.writerow([format_float(k), format_float(r)])
    except OSError as e:
        raise E.ReportError(f"Could not write report: {e}", code="6001", context={"path": str(path)})
    return path


def print_report(report, console=None, max_rows=40):
    """Render the checks as a ``rich.Table``; long reports show their failures first."""
    console = console or Console()
    rows = sorted(report.checks, key=lambda c: c.passed)[:max_rows]
    table = Table(title=f"{report.command} ({report.passed_count}/{len(report.checks)} passed)",
                  show_header=True, header_style="bold magenta")
    table.add_column("Check", style="cyan", no_wrap=True)
    table.add_column("Operation")
    table.add_column("Bound", justify="right")
    table.add_column("Measured", justify="right")
    table.add_column("Margin", justify="right")
    table.add_column("Pass")
    for c in rows:
        mark = "[green]yes[/green]" if c.passed else "[bold red]no[/bold red]"
        table.add_row(c.name, c.operation, f"{c.direction} {float(c.bound):.6g}",
                      f"{float(c.measured):.6g}", f"{c.margin:.3g}", mark)
    console.print(table)
    if len(report.checks) > max_rows:
        console.print(f"[italic]{len(report.checks) - max_rows} more rows in the report file.[/italic]")
    for key, value in report.summary.items():
        console.print(f"[bold]{key}[/bold]: {value}")
