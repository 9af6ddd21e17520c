"""
Report Generator

Writes experiment results as CSV, the run manifest and optional raw per-trial
dump as JSON, and formats a console summary table.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from tabulate import tabulate  # type: ignore[import-untyped]

from .models import CSV_COLUMNS, ResultRow, RunManifest, RunResult, TrialRecord


def write_csv(rows: list[ResultRow], output_path: str | Path) -> Path:
    """
    Write result rows as UTF-8 CSV with LF line endings.

    Floats use their shortest round-trippable representation.

    Args:
        rows: Aggregated rows, already in output order
        output_path: Destination file

    Returns:
        Path to the written file
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_values())
    return output_path


def write_manifest(manifest: RunManifest, output_path: str | Path, indent: int = 2) -> Path:
    """Write the run manifest as JSON."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        json.dump(manifest.model_dump(mode="json"), f, indent=indent, ensure_ascii=False)
    return output_path


def write_raw_dump(records: list[TrialRecord], output_path: str | Path) -> Path:
    """
    Write per-trial powers, iterations and refinement traces as JSON.

    Infinite powers are written as null.
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        json.dump([r.model_dump(mode="json") for r in records], f, indent=1)
    return output_path


def write_outputs(result: RunResult, out_dir: str | Path, raw_dump: bool = False) -> dict[str, Path]:
    """
    Write CSV, manifest and (optionally) the raw dump for a run.

    Files are named after the experiment: <name>.csv, <name>_manifest.json,
    <name>_raw.json.
    """
    out_dir = Path(out_dir)
    name = result.manifest.name
    paths = {"csv": write_csv(result.rows, out_dir / f"{name}.csv")}
    if raw_dump:
        paths["raw"] = write_raw_dump(result.records, out_dir / f"{name}_raw.json")
    paths["manifest"] = out_dir / f"{name}_manifest.json"
    manifest = result.manifest.model_copy(update={"outputs": {k: str(v) for k, v in paths.items()}})
    write_manifest(manifest, paths["manifest"])
    return paths


def generate_console_report(rows: list[ResultRow]) -> str:
    """
    Format result rows as a console table.

    Args:
        rows: Aggregated rows

    Returns:
        Formatted string report
    """
    if not rows:
        return "No results."
    table = [
        [
            r.scheme,
            f"{r.sweep:g}",
            "inf" if math.isinf(r.bits) else f"{r.bits:g}",
            f"{r.power_dbm:.2f}" if math.isfinite(r.power_dbm) else "infeasible",
            f"{r.stderr_db:.2f}",
            f"{r.iters:.1f}",
            f"{r.infeasible}/{r.trials}",
        ]
        for r in rows
    ]
    headers = ["Scheme", "Sweep", "Bits", "Power (dBm)", "SE (dB)", "Iters", "Infeasible"]
    return tabulate(table, headers=headers, tablefmt="grid")
