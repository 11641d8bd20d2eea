"""Command-line interface: fit, diagnose, simulate, bench-real, calibrate.

Exit codes: 0 success, 2 input/ingestion error, 3 estimation error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import plots, simbench
from .baselines import ls_fit, mm_fit, s_fit
from .data import load_csv
from .errors import CalibrationError, CellshotError, IngestionError
from .rho import tune_for_bdp, tune_for_efficiency
from .shooting import (DEFAULT_BDP, DEFAULT_CUTOFF, ShootingConfig,
                       flag_outliers, shooting_fit)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ESTIMATION = 3

METHODS = ("shooting-bi", "shooting-skh", "ls", "s", "mm")
RHO_CLI_NAMES = {"biweight": "biweight", "skipped-huber": "skipped_huber",
                 "lqq": "lqq"}


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _write(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require_seed(args, method):
    if method != "ls" and args.seed is None:
        raise IngestionError(
            f"--seed is required for randomized method {method!r}")
    return 0 if args.seed is None else args.seed


def _shooting_kind(method):
    return "biweight" if method == "shooting-bi" else "skipped_huber"


def _run_fit_method(data, method, bdp, cutoff, seed):
    if method == "ls":
        return ls_fit(data)
    if method == "s":
        return s_fit(data, tune_for_bdp("biweight", bdp), seed=seed)
    if method == "mm":
        return mm_fit(data, bdp=0.5, eff=0.95, seed=seed)
    cfg = ShootingConfig(spec=tune_for_bdp(_shooting_kind(method), bdp),
                         cutoff_c=cutoff, init_seed=seed)
    return shooting_fit(data, cfg)


def _fit_report(data, method, fit, bdp, cutoff, seed, threshold):
    report = {
        "method": method,
        "response": data.response_name,
        "columns": list(data.column_names),
        "intercept": None,
        "slopes": {},
        "scales": None,
        "flagged_cells": [],
        "flagged_rows": [],
        "convergence": {},
        "config": {"bdp": bdp, "cutoff": cutoff, "seed": seed,
                   "threshold": threshold},
    }
    if method.startswith("shooting"):
        cells, rows = flag_outliers(fit, threshold)
        report["intercept"] = fit.intercept
        report["slopes"] = {name: float(v) for name, v in
                            zip(data.column_names, fit.slopes)}
        report["scales"] = {name: float(v) for name, v in
                            zip(data.column_names, fit.scales)}
        report["flagged_cells"] = [
            {"row": int(i), "column": data.column_names[j],
             "weight": float(fit.weights[i, j])}
            for i, j in zip(*np.nonzero(cells))]
        report["flagged_rows"] = [int(i) for i in np.nonzero(rows)[0]]
        report["convergence"] = {
            "outer_loops": fit.outer_loops,
            "converged": bool(fit.converged),
            "scale_change_trace": list(fit.scale_change_trace),
        }
    else:
        report["intercept"] = fit.intercept
        report["slopes"] = {name: float(v) for name, v in
                            zip(data.column_names, fit.slopes)}
        report["scales"] = {"residual_scale": float(fit.scale)}
        report["convergence"] = {"method": fit.method}
    return report


def cmd_fit(args) -> int:
    seed = _require_seed(args, args.method)
    data = load_csv(args.data, args.response)
    fit = _run_fit_method(data, args.method, args.bdp, args.cutoff, seed)
    report = _fit_report(data, args.method, fit, args.bdp, args.cutoff,
                         seed, args.threshold)
    _write(_json_dumps(report) + "\n", args.out)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    seed = _require_seed(args, args.method)
    data = load_csv(args.data, args.response)
    kind = _shooting_kind(args.method)
    cfg = ShootingConfig(spec=tune_for_bdp(kind, args.bdp),
                         cutoff_c=args.cutoff, init_seed=seed)
    fit = shooting_fit(data, cfg)
    cells, rows = flag_outliers(fit, args.threshold)
    lines = ["kind,row,column,weight"]
    for i, j in zip(*np.nonzero(cells)):
        lines.append(f"cell,{i},{data.column_names[j]},"
                     f"{fit.weights[i, j]!r}")
    for i in np.nonzero(rows)[0]:
        lines.append(f"whole_row,{i},,")
    lines.append(f"summary,,,cells={int(cells.sum())};"
                 f"whole_rows={int(rows.sum())}")
    _write("\n".join(lines) + "\n", args.out)
    if args.out:
        plots.save_weight_figure(fit.weights, data.column_names,
                                 _fig_path(args.out), args.threshold)
    return EXIT_OK


def _fig_path(out_path):
    base = out_path
    for suffix in (".csv", ".json", ".txt"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
            break
    return base + ".png"


def _write_report_files(report, prefix):
    with open(prefix + ".csv", "w", encoding="utf-8") as fh:
        fh.write(report.to_wide_csv())
    with open(prefix + ".tidy.csv", "w", encoding="utf-8") as fh:
        fh.write(report.to_tidy_csv())
    with open(prefix + ".json", "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")


CLI_TABLES = {"cell-uncorr": "cell_uncorr", "cell-corr": "cell_corr",
              "row-corr": "row_corr", "vertical": "vertical_corr"}


def cmd_simulate(args) -> int:
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
    unknown = [e for e in estimators if e not in simbench.ESTIMATOR_NAMES]
    if unknown:
        raise IngestionError(f"unknown estimators: {', '.join(unknown)}")
    eps_grid = [float(e) for e in args.eps.split(",") if e.strip()]
    schemes = None
    if args.schemes:
        schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    report = simbench.run_table(
        CLI_TABLES[args.table], estimators, eps_grid,
        R=args.replicates, seed=args.seed, schemes=schemes)
    _write_report_files(report, args.out_prefix)
    plots.save_table_figure(report, args.out_prefix + ".png")
    return EXIT_OK


def cmd_bench_real(args) -> int:
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
    unknown = [e for e in estimators if e not in simbench.ESTIMATOR_NAMES]
    if unknown:
        raise IngestionError(f"unknown estimators: {', '.join(unknown)}")
    data = load_csv(args.data, args.response)
    if args.mode == "resample":
        report = simbench.real_data_resample(
            data, R=args.replicates, frac=args.frac, estimators=estimators,
            seed=args.seed)
    else:
        report = simbench.real_data_contaminate(
            data, eps=args.eps, shift=args.shift, R=args.replicates,
            estimators=estimators, seed=args.seed)
    _write_report_files(report, args.out_prefix)
    plots.save_and_figure(report, args.out_prefix + ".png")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    kind = RHO_CLI_NAMES[args.rho]
    if (args.bdp is None) == (args.efficiency is None):
        raise IngestionError("give exactly one of --bdp or --efficiency")
    try:
        if args.bdp is not None:
            spec = tune_for_bdp(kind, args.bdp)
            target = {"bdp": args.bdp}
        else:
            spec = tune_for_efficiency(kind, args.efficiency)
            target = {"efficiency": args.efficiency}
    except (CalibrationError, ValueError) as exc:
        raise IngestionError(str(exc)) from exc
    payload = {
        "kind": spec.kind,
        "target": target,
        "constants": list(spec.constants),
        "delta": spec.delta,
        "rho_sup": spec.rho_sup,
        "breakdown_point": spec.breakdown_point,
    }
    _write(_json_dumps(payload) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellshot",
        description="Robust regression under cellwise contamination: "
                    "shooting S-estimation, baselines, and benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_flags(p):
        p.add_argument("--data", required=True, help="input CSV path")
        p.add_argument("--response", required=True,
                       help="name of the response column")

    p_fit = sub.add_parser("fit", help="fit one estimator, emit a JSON report")
    add_data_flags(p_fit)
    p_fit.add_argument("--method", choices=METHODS, default="shooting-bi")
    p_fit.add_argument("--bdp", type=float, default=DEFAULT_BDP,
                       help="breakdown point for the simple regressions")
    p_fit.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF,
                       help="hard-rejection cutoff c")
    p_fit.add_argument("--threshold", type=float, default=0.5,
                       help="flagging threshold on cell weights")
    p_fit.add_argument("--seed", type=int, default=None)
    p_fit.add_argument("--out", default=None, help="output path (default stdout)")
    p_fit.set_defaults(func=cmd_fit)

    p_diag = sub.add_parser("diagnose",
                            help="list flagged cells and whole rows as CSV")
    add_data_flags(p_diag)
    p_diag.add_argument("--method", choices=("shooting-bi", "shooting-skh"),
                        default="shooting-bi")
    p_diag.add_argument("--bdp", type=float, default=DEFAULT_BDP)
    p_diag.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)
    p_diag.add_argument("--threshold", type=float, default=0.5)
    p_diag.add_argument("--seed", type=int, default=None)
    p_diag.add_argument("--out", default=None,
                        help="output CSV path; a .png weight map is written "
                             "alongside (default stdout, no figure)")
    p_diag.set_defaults(func=cmd_diagnose)

    p_sim = sub.add_parser("simulate",
                           help="run a simulation table and write report files")
    p_sim.add_argument("--table", choices=sorted(CLI_TABLES), required=True)
    p_sim.add_argument("--eps", required=True,
                       help="comma-separated contamination fractions")
    p_sim.add_argument("--replicates", type=int, required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--estimators",
                       default=",".join(simbench.ESTIMATOR_NAMES))
    p_sim.add_argument("--schemes", default=None,
                       help="comma-separated subset of dense,scattered,wide")
    p_sim.add_argument("--out-prefix", required=True,
                       help="prefix for .csv/.tidy.csv/.json/.png outputs")
    p_sim.set_defaults(func=cmd_simulate)

    p_bench = sub.add_parser("bench-real",
                             help="resampling / contamination study on a CSV")
    add_data_flags(p_bench)
    p_bench.add_argument("--mode", choices=("resample", "contaminate"),
                         required=True)
    p_bench.add_argument("--replicates", type=int, required=True)
    p_bench.add_argument("--seed", type=int, required=True)
    p_bench.add_argument("--frac", type=float, default=0.8,
                         help="subset fraction for resample mode")
    p_bench.add_argument("--eps", type=float, default=0.05,
                         help="cell fraction for contaminate mode")
    p_bench.add_argument("--shift", type=float, default=10.0,
                         help="outlier shift in column MADs")
    p_bench.add_argument("--estimators",
                         default=",".join(simbench.ESTIMATOR_NAMES))
    p_bench.add_argument("--out-prefix", required=True)
    p_bench.set_defaults(func=cmd_bench_real)

    p_cal = sub.add_parser("calibrate",
                           help="tune rho constants for a breakdown point "
                                "or efficiency")
    p_cal.add_argument("--rho", choices=sorted(RHO_CLI_NAMES), required=True)
    p_cal.add_argument("--bdp", type=float, default=None)
    p_cal.add_argument("--efficiency", type=float, default=None)
    p_cal.add_argument("--out", default=None)
    p_cal.set_defaults(func=cmd_calibrate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IngestionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CellshotError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
