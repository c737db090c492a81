"""Report emission: tidy CSV, JSON summary, and the ASMSE tables.

The per-scenario CSV has one row per scenario x estimator x metric and
is written at full float precision (``repr``), so re-ingesting it and
recomputing the summary reproduces the summary file byte for byte.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..criteria import CRITERIA, CRITERION_LABELS
from ..fitting import DEFAULT_OPTIONS
from .engine import ScenarioReport, run_scenario
from .scenarios import Scenario

__all__ = [
    "run_grid",
    "report_rows",
    "write_rows_csv",
    "read_rows_csv",
    "summary_from_rows",
    "write_summary_json",
    "write_experiment_csv",
    "format_asmse_tables",
]

CSV_SCHEMA = "dosefit/scenario-metrics v1"
SUMMARY_SCHEMA = "dosefit/simulation-summary v1"

ROW_FIELDS = ("scenario", "design", "n_total", "true_model",
              "method", "criterion", "metric", "value")


def default_workers() -> int:
    env = os.environ.get("DOSEFIT_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_single_threaded(scenario, options):
    # one compute thread per worker process; the pool provides the parallelism
    try:
        import numba

        numba.set_num_threads(1)
    except ImportError:
        pass
    return run_scenario(scenario, options)


def run_grid(scenarios: list[Scenario], *, workers: int | None = None,
             options=DEFAULT_OPTIONS, progress=None) -> list[ScenarioReport]:
    """Run all scenarios, possibly on a process pool; order follows the input.

    Results are identical for any worker count (all randomness is keyed
    by scenario and replication indices).
    """
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(scenarios) <= 1:
        reports = []
        for s in scenarios:
            reports.append(run_scenario(s, options))
            if progress:
                progress(s, reports[-1])
        return reports
    reports = [None] * len(scenarios)
    # spawn: forking a process that already runs OpenMP threads is unsafe
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        futures = {pool.submit(_run_single_threaded, s, options): i
                   for i, s in enumerate(scenarios)}
        for fut, i in futures.items():
            reports[i] = fut.result()
            if progress:
                progress(scenarios[i], reports[i])
    return reports


def _method_parts(name: str) -> tuple[str, str]:
    """'select_aic' -> ('select', 'aic'); 'model_emax' -> ('model', 'emax')."""
    head, _, tail = name.partition("_")
    return head, tail


def report_rows(report: ScenarioReport) -> list[dict]:
    """Tidy rows (one per metric) for one scenario report."""
    s = report.scenario
    base = {
        "scenario": s.index,
        "design": s.design_name,
        "n_total": s.n_total,
        "true_model": s.true_model.kind,
    }
    rows = []

    def add(method, criterion, metric, value):
        rows.append({**base, "method": method, "criterion": criterion,
                     "metric": metric, "value": value})

    add("reference", "", "mmse", report.metrics.mmse)
    add("reference", "", "mmse_td", report.metrics.mmse_td)
    add("reference", "", "true_td", report.true_td)
    for name, mm in report.metrics.methods.items():
        method, tail = _method_parts(name)
        for dose, val in zip(s.doses, mm.mse_dose):
            add(method, tail, f"mse@{dose:g}", val)
        add(method, tail, "amse", mm.amse)
        add(method, tail, "smse", mm.smse)
        add(method, tail, "mse_td", mm.mse_td)
        add(method, tail, "smse_td", mm.smse_td)
        add(method, tail, "n_td_used", mm.n_td_used)
        add(method, tail, "n_td_excluded", mm.n_td_excluded)
    for crit, probs in report.selection_probs.items():
        for label, p in probs.items():
            add("selection_prob", crit, label, p)
    for crit, freqs in report.boot_selection_freq.items():
        for label, p in freqs.items():
            add("boot_selection_freq", crit, label, p)
        add("boot_runs_excluded", crit, "count", report.boot_runs_excluded[crit])
    for label, count in report.tic_failures.items():
        add("tic_failures", "tic", label, count)
    return rows


def write_rows_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {CSV_SCHEMA}\n")
        writer = csv.DictWriter(fh, fieldnames=ROW_FIELDS)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            out["value"] = repr(float(row["value"]))
            writer.writerow(out)


def read_rows_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: missing schema header")
        if CSV_SCHEMA not in first:
            raise ValueError(f"{path}: unsupported schema {first.strip()!r}")
        for row in csv.DictReader(fh):
            row["scenario"] = int(row["scenario"])
            row["n_total"] = int(row["n_total"])
            row["value"] = float(row["value"])
            rows.append(row)
    return rows


def write_experiment_csv(rows: list[dict], path) -> None:
    """Tidy CSV of selection-probability curves (criterion, grid value, probability)."""
    if not rows:
        raise ValueError("no experiment rows to write")
    fields = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        fh.write("# dosefit/selection-curves v1\n")
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            out["prob_sigemax"] = repr(float(row["prob_sigemax"]))
            writer.writerow(out)


# ---------------------------------------------------------------------------
# ASMSE aggregation
# ---------------------------------------------------------------------------

def _mean(values: list[float]) -> float:
    finite = [v for v in values if np.isfinite(v)]
    return float(np.mean(finite)) if finite else float("nan")


def summary_from_rows(rows: list[dict]) -> dict:
    """ASMSE tables recomputed from tidy rows.

    ASMSE(design) averages each estimator's SMSE over the scenarios of
    one design; the target-dose ASMSE averages SMSE_td over all
    scenarios.
    """
    designs = sorted({r["design"] for r in rows})
    methods = sorted({
        (r["method"], r["criterion"]) for r in rows
        if r["method"] in ("select", "average", "boot", "model")
    })
    asmse: dict[str, dict[str, dict[str, float]]] = {}
    for method, crit in methods:
        per_design = {}
        for design in designs:
            per_design[design] = _mean([
                r["value"] for r in rows
                if r["method"] == method and r["criterion"] == crit
                and r["metric"] == "smse" and r["design"] == design
            ])
        per_design["td"] = _mean([
            r["value"] for r in rows
            if r["method"] == method and r["criterion"] == crit
            and r["metric"] == "smse_td"
        ])
        asmse.setdefault(method, {})[crit] = per_design
    return {
        "schema": SUMMARY_SCHEMA,
        "n_scenarios": len({r["scenario"] for r in rows}),
        "designs": designs,
        "asmse": asmse,
    }


def write_summary_json(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def format_asmse_tables(summary: dict) -> str:
    """The two ASMSE tables (selection; averaging + bootstrap) as text."""
    designs = summary["designs"]
    asmse = summary["asmse"]
    lines = []

    def table(title, columns):
        lines.append(title)
        header = f"{'':14s}" + "".join(f"{name:>10s}" for name, _, _ in columns)
        lines.append(header)
        for design in list(designs) + ["td"]:
            label = f"ASMSE({design})" if design != "td" else "ASMSE_td"
            cells = []
            for _, method, crit in columns:
                value = asmse.get(method, {}).get(crit, {}).get(design, float("nan"))
                cells.append(f"{value:>10.2f}")
            lines.append(f"{label:14s}" + "".join(cells))
        lines.append("")

    crit_cols = [(CRITERION_LABELS[c], "select", c) for c in CRITERIA]
    if "select" in asmse:
        table("Model selection (ASMSE)", crit_cols)
    if "average" in asmse:
        cols = [(CRITERION_LABELS[c], "average", c) for c in CRITERIA]
        for c in ("aic", "bic"):
            if c in asmse.get("boot", {}):
                cols.append((f"{CRITERION_LABELS[c]}-Boot", "boot", c))
        table("Model averaging (ASMSE)", cols)
    return "\n".join(lines)
