"""Command-line front end: fit, analyze, simulate.

Exit codes: 0 success, 2 usage/data/config error, 3 numerical failure.

``fit`` prints per-model parameter estimates for a long-form
``dose,response`` CSV (or per-arm ``dose,n,mean,sd`` summaries with
``--summary``). ``analyze`` adds the criterion table (values, weights,
AIC/BIC bootstrap selection frequencies), the selected or averaged
dose-effect curve, and target-dose estimates with bootstrap percentile
intervals. ``simulate`` runs a scenario grid from a JSON config and
writes tidy CSV plus a JSON summary.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .averaging import average_effect, average_target_dose, weights
from .bootstrap import DoseEffect, TargetDose, bootstrap_average
from .criteria import (
    CRITERIA,
    CRITERION_LABELS,
    SingularInformationError,
    score_models,
    select,
)
from .fitting import Dataset, FitResult, GroupSummary, fit
from .models import MODEL_KINDS, model_from_name, predict, target_dose
from .sim import (
    ConfigError,
    format_asmse_tables,
    load_config,
    report_rows,
    run_grid,
    scenarios_from_config,
    summary_from_rows,
    write_rows_csv,
    write_summary_json,
)

USAGE_ERROR = 2
NUMERIC_ERROR = 3

DEFAULT_MODELS = "linear,quadratic,emax,sigemax,anova"


class CliError(Exception):
    def __init__(self, message: str, code: int = USAGE_ERROR):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------

def _read_csv(path, columns):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise CliError(f"cannot open {path}: {exc.strerror}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CliError(f"{path}: no observations (empty file)")
        header = [h.strip().lower() for h in header]
        if header != list(columns):
            raise CliError(
                f"{path}: line 1: expected header {','.join(columns)}, got {','.join(header)}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(columns):
                raise CliError(f"{path}: line {lineno}: expected {len(columns)} fields")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise CliError(f"{path}: line {lineno}: not numeric: {row}")
        if not rows:
            raise CliError(f"{path}: no observations")
    return np.asarray(rows)


def load_dataset(path) -> Dataset:
    rows = _read_csv(path, ("dose", "response"))
    try:
        return Dataset.from_observations(rows[:, 0], rows[:, 1])
    except ValueError as exc:
        raise CliError(f"{path}: {exc}")


def load_summary(path) -> GroupSummary:
    rows = _read_csv(path, ("dose", "n", "mean", "sd"))
    try:
        return GroupSummary.from_moments(
            rows[:, 0], [int(x) for x in rows[:, 1]], rows[:, 2], rows[:, 3]
        )
    except ValueError as exc:
        raise CliError(f"{path}: {exc}")


def parse_models(spec: str, design_doses):
    names = [s.strip().lower() for s in spec.split(",") if s.strip()]
    if not names:
        raise CliError("no models requested")
    models = []
    for name in names:
        if name not in MODEL_KINDS:
            raise CliError(f"unknown model name {name!r}; expected one of {MODEL_KINDS}")
        models.append(model_from_name(name, design_doses))
    return models


def percent(x: float) -> str:
    """Half-up rounded percentage for display."""
    return str(Decimal(100 * x).quantize(Decimal("1"), rounding=ROUND_HALF_UP)) + "%"


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _fit_all(models, data):
    fits = []
    for m in models:
        f = fit(m, data)
        if not f.converged:
            print(f"warning: {m.label} fit did not converge (may not be identifiable "
                  f"from {data.design.k} dose level(s))", file=sys.stderr)
        fits.append(f)
    return fits


def cmd_fit(args) -> int:
    data = load_summary(args.input) if args.summary else load_dataset(args.input)
    models = parse_models(args.models, data.design.doses)
    fits = _fit_all(models, data)
    table = [{
        "model": f.model.kind,
        "theta": list(map(float, f.theta)),
        "sigma2": f.sigma2,
        "loglik": f.loglik,
        "converged": f.converged,
    } for f in fits]
    if args.format == "json":
        payload = json.dumps({"schema": "dosefit/fits v1", "fits": table}, indent=2)
        _emit(args.out, payload + "\n")
    else:
        lines = ["model,converged,sigma2,loglik,theta"]
        for row in table:
            theta = " ".join(repr(v) for v in row["theta"])
            lines.append(f"{row['model']},{row['converged']},{row['sigma2']!r},"
                         f"{row['loglik']!r},{theta}")
        _emit(args.out, "\n".join(lines) + "\n")
    return 0


def _emit(out, text: str) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _criterion_table(fits, data, criteria):
    table = {}
    for crit in criteria:
        try:
            scores = score_models(crit, fits, data)
        except SingularInformationError as exc:
            raise CliError(f"criterion {crit}: {exc}", NUMERIC_ERROR)
        w = weights(scores)
        table[crit] = {
            "scores": scores,
            "weights": w,
            "selected": select(scores).kind,
        }
    return table


def cmd_analyze(args) -> int:
    if args.delta == 0:
        raise CliError("--delta must be nonzero")
    data = load_summary(args.input) if args.summary else load_dataset(args.input)
    models = parse_models(args.models, data.design.doses)
    criteria = list(CRITERIA) if args.criterion == "all" else [args.criterion]
    mode_criterion = criteria[0] if args.criterion != "all" else "aic"

    boot_reps = args.boot_reps
    if boot_reps > 0 and any(n <= 1 for n in data.design.group_sizes):
        raise CliError("bootstrap needs n_i > 1 in every dose group "
                       "(stratified resampling precondition); rerun with --boot-reps 0")
    if args.mode == "bootstrap" and boot_reps == 0:
        raise CliError("--mode bootstrap needs --boot-reps >= 1")
    if args.mode == "bootstrap" and isinstance(data, GroupSummary):
        raise CliError("--mode bootstrap needs individual responses, not --summary data")
    if args.mode == "bootstrap" and mode_criterion not in ("aic", "bic"):
        raise CliError("--mode bootstrap works with --criterion aic, bic, or all")
    if boot_reps > 0 and isinstance(data, GroupSummary):
        boot_reps = 0  # summary data cannot be resampled; table omits bootstrap columns

    fits = _fit_all(models, data)
    table = _criterion_table(fits, data, criteria)

    dose_range = (data.design.doses[0], data.design.doses[-1])
    grid = ([float(x) for x in args.grid.split(",")] if args.grid
            else list(data.design.doses))

    boot_freq: dict[str, dict[str, float]] = {}
    boot_td = {}
    if boot_reps > 0:
        for crit in [c for c in ("aic", "bic") if c in criteria]:
            res = bootstrap_average(
                data, models, crit, TargetDose(args.delta, dose_range),
                n_boot=boot_reps, seed=args.seed, level=args.level,
            )
            boot_freq[crit] = {m.kind: res.selection_counts[m.label] / boot_reps
                               for m in models}
            boot_td[crit] = res

    report = _analysis_report(args, data, models, fits, table, grid, dose_range,
                              boot_freq, boot_td, mode_criterion, boot_reps)
    if args.format == "json":
        _emit(args.out, json.dumps(report, indent=2) + "\n")
    else:
        _emit(args.out, _analysis_text(report))
    return 0


def _analysis_report(args, data, models, fits, table, grid, dose_range,
                     boot_freq, boot_td, mode_criterion, boot_reps):
    by_model = lambda values: {m.kind: v for m, v in zip(models, values)}
    crit_block = {}
    for crit, block in table.items():
        crit_block[crit] = {
            "values": by_model([s.value for s in block["scores"]]),
            "weights": by_model([float(w) for w in block["weights"].values]),
            "selected": block["selected"],
        }
        if crit in boot_freq:
            crit_block[crit]["bootstrap_freq"] = boot_freq[crit]

    estimates: dict[str, object] = {"mode": args.mode, "criterion": mode_criterion,
                                    "delta": args.delta, "dose_grid": grid}
    block = table[mode_criterion]
    if args.mode == "select":
        chosen = next(f for f in fits if f.model.kind == block["selected"])
        estimates["selected_model"] = chosen.model.kind
        estimates["curve"] = [float(predict(chosen.model, chosen.theta, d)) for d in grid]
        td = target_dose(chosen.model, chosen.theta, args.delta, dose_range)
        estimates["target_dose"] = td
    elif args.mode == "average":
        w = block["weights"]
        estimates["curve"] = [average_effect(fits, w, d) for d in grid]
        estimates["target_dose"] = average_target_dose(fits, w, args.delta, dose_range)
    else:  # bootstrap
        res_td = boot_td[mode_criterion]
        curve = []
        for d in grid:
            r = bootstrap_average(data, models, mode_criterion, DoseEffect(d),
                                  n_boot=boot_reps, seed=args.seed, level=args.level)
            curve.append({"dose": d, "median": r.median, "low": r.interval[0],
                          "high": r.interval[1]})
        estimates["curve"] = curve
        estimates["target_dose"] = None if res_td.empty else res_td.median
        estimates["target_dose_interval"] = list(res_td.interval)
        estimates["level"] = args.level
        estimates["resamples_used"] = res_td.n_used

    return {
        "schema": "dosefit/analysis v1",
        "input": str(args.input),
        "n_total": data.design.n_total,
        "doses": list(data.design.doses),
        "criteria": crit_block,
        "estimates": estimates,
        "seed": args.seed,
    }


def _analysis_text(report) -> str:
    lines = []
    doses = report["doses"]
    lines.append(f"n = {report['n_total']} across doses {doses}")
    model_names = list(next(iter(report["criteria"].values()))["values"])
    for crit, block in report["criteria"].items():
        lines.append("")
        lines.append(f"[{CRITERION_LABELS[crit]}] selected: {block['selected']}")
        has_boot = "bootstrap_freq" in block
        head = f"  {'model':<11s}{'value':>10s}{'weight':>9s}"
        if has_boot:
            head += f"{'bootstrap':>11s}"
        lines.append(head)
        for name in model_names:
            row = f"  {name:<11s}{block['values'][name]:>10.2f}{percent(block['weights'][name]):>9s}"
            if has_boot:
                row += f"{percent(block['bootstrap_freq'][name]):>11s}"
            lines.append(row)
    est = report["estimates"]
    lines.append("")
    lines.append(f"estimates ({est['mode']}, {CRITERION_LABELS[est['criterion']]}, "
                 f"delta={est['delta']:g}):")
    if est["mode"] == "select":
        lines.append(f"  selected model: {est['selected_model']}")
    if est["mode"] == "bootstrap":
        for point in est["curve"]:
            lines.append(f"  effect@{point['dose']:g} = {point['median']:.4f} "
                         f"[{point['low']:.4f}, {point['high']:.4f}]")
        td = est["target_dose"]
        lo, hi = est["target_dose_interval"]
        if td is None or not np.isfinite(td):
            lines.append("  target dose: not reached in range")
        else:
            lines.append(f"  target dose = {td:.4f} [{lo:.4f}, {hi:.4f}] "
                         f"(level {est['level']:g})")
    else:
        for d, v in zip(est["dose_grid"], est["curve"]):
            lines.append(f"  effect@{d:g} = {v:.4f}")
        td = est["target_dose"]
        lines.append("  target dose: not reached in range" if td is None
                     else f"  target dose = {td:.4f}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config)
        scenarios = scenarios_from_config(cfg)
    except ConfigError as exc:
        raise CliError(f"{args.config}: {exc}")
    except OSError as exc:
        raise CliError(f"cannot open {args.config}: {exc.strerror}")

    out_dir = Path(args.out) if args.out else Path.cwd()
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(s, _report):
        print(f"  done scenario {s.index}: {s.label}", file=sys.stderr)

    print(f"running {len(scenarios)} scenario(s)...", file=sys.stderr)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        reports = run_grid(scenarios, workers=args.workers, progress=progress)

    rows = []
    for rep in reports:
        rows.extend(report_rows(rep))
    csv_path = out_dir / "scenario_metrics.csv"
    write_rows_csv(rows, csv_path)
    summary = summary_from_rows(rows)
    json_path = out_dir / "summary.json"
    write_summary_json(summary, json_path)
    print(f"wrote {csv_path} and {json_path}", file=sys.stderr)
    sys.stdout.write(format_asmse_tables(summary))
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dosefit",
        description="Dose-response model fitting, selection, averaging, and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, formats=("csv", "json")):
        p.add_argument("--input", required=True, help="CSV input file")
        p.add_argument("--summary", action="store_true",
                       help="input is per-arm dose,n,mean,sd summary data")
        p.add_argument("--models", default=DEFAULT_MODELS,
                       help=f"comma-separated candidate models (default {DEFAULT_MODELS})")
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--out", help="write output to this file instead of stdout")

    p_fit = sub.add_parser("fit", help="fit candidate models")
    add_io(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_an = sub.add_parser("analyze", help="criterion table, weights, averaged estimates")
    add_io(p_an, formats=("text", "json"))
    p_an.add_argument("--criterion", choices=CRITERIA + ("all",), default="all")
    p_an.add_argument("--mode", choices=("select", "average", "bootstrap"),
                      default="average")
    p_an.add_argument("--delta", type=float, default=-1.3,
                      help="signed target effect over placebo")
    p_an.add_argument("--boot-reps", type=int, default=500)
    p_an.add_argument("--seed", type=int, default=0)
    p_an.add_argument("--level", type=float, default=0.95)
    p_an.add_argument("--grid", help="comma-separated doses for the effect curve "
                                     "(default: the design doses)")
    p_an.set_defaults(func=cmd_analyze)

    p_sim = sub.add_parser("simulate", help="run a simulation study from a JSON config")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", help="output directory (default: cwd)")
    p_sim.add_argument("--workers", type=int, default=None,
                       help="process count (default: DOSEFIT_WORKERS or cpu count)")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SingularInformationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    except np.linalg.LinAlgError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
