"""Command-line interface.

Subcommands: optimize-estimation, optimize-inference, validate, serve.
Exit codes: 0 success, 1 usage or config error, 2 infeasible design,
3 internal numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config, parse_document
from .design import DegenerateDesignError
from .distributions import ConfigurationError
from .inference import cox_criterion
from .objective import CurveObjective
from .optimize import InfeasibleDesignError, optimize_curve
from .presets import reproduction_plans, TABLE1_PUBLISHED, TABLE1_THETAS, baseline_design
from .report import (ensure_dir, failure_counts_figure, power_figure,
                     risk_agreement_figure, variance_comparison_figure,
                     write_are_table_csv, write_report_csv, write_summary,
                     write_variance_curve_csv)
from .simulate import run_experiment

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cohortmix",
        description="Optimal prevalent/incident mix for period-prevalent survival studies",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", type=Path, required=config_required,
                        help="JSON config document")
        sp.add_argument("--out", type=Path, default=Path("cohortmix-out"),
                        help="output directory")
        sp.add_argument("--seed", type=int, default=42, help="random seed")
        sp.add_argument("--reps", type=int, default=None,
                        help="simulation replications override")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="simulator cell parallelism (default: all cores; "
                             "results are thread-count invariant)")
        sp.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering, write CSV only")

    sp = sub.add_parser("optimize-estimation",
                        help="minimize the weighted survival-curve variance objective")
    common(sp)
    sp = sub.add_parser("optimize-inference",
                        help="all-prevalent vs all-incident power comparison")
    common(sp)
    sp = sub.add_parser("validate", help="Monte Carlo validation experiments")
    common(sp, config_required=False)
    sp.add_argument("--reproduce", type=str, default=None,
                    help="preset: table1|fig2|fig3|figs1|figs2|application")
    sp.add_argument("--dump-cohort", type=Path, default=None,
                    help="also write one simulated cohort as a record CSV")
    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--port", type=int, default=8321)
    sp.add_argument("--host", type=str, default="127.0.0.1")
    return p


def _header(args, extra=None):
    lines = [f"cohortmix {__version__}", f"seed: {args.seed}"]
    if getattr(args, "reps", None):
        lines.append(f"replications: {args.reps}")
    if extra:
        lines.extend(extra)
    return lines


def cmd_optimize_estimation(args) -> int:
    design, _plan, _effect, _extras = parse_document(load_config(args.config))
    out = ensure_dir(args.out)
    ev = CurveObjective(design)
    result = optimize_curve(design, evaluator=ev)
    grid = np.linspace(0.0, design.tau, 201)
    curve_opt = ev.variance_curve(grid, result.pi_opt)
    curve_even = ev.variance_curve(grid, 0.5)

    write_variance_curve_csv(curve_opt, out / "variance_curve_optimal.csv")
    write_variance_curve_csv(curve_even, out / "variance_curve_even_mix.csv")
    are_rows = [{"comparison_pi": p, "are": a} for p, a in result.are_table]
    write_are_table_csv(are_rows, out / "are_table.csv")

    lines = _header(args)
    lines.append(f"pi_opt={result.pi_opt:.2f}")
    lines.append(f"pi_opt_full_precision={result.pi_opt!r}")
    lines.append(f"incident_percent={100 * result.pi_opt:.0f}")
    lines.append(f"prevalent_percent={100 * (1 - result.pi_opt):.0f}")
    lines.append(f"boundary={result.boundary}")
    lines.append(f"objective_n_times_k={result.objective_value!r}")
    for p, a in result.are_table:
        lines.append(f"ARE(pi_opt, {p:g})={'inf' if math.isinf(a) else f'{a:.4f}'}")
    write_summary(lines, out / "summary.txt")
    print("\n".join(lines))

    if not args.no_figures:
        wvals = np.asarray(design.weight.pdf(grid))
        variance_comparison_figure(
            grid,
            {f"optimal mix ({100*result.pi_opt:.0f}% incident)": curve_opt.values,
             "even mix (50% incident)": curve_even.values},
            out / "variance_comparison.png",
            weight_curve=np.where(np.isfinite(wvals), wvals, np.nan),
            title="survival-estimate variance under the optimal and even mixes",
        )
    return EXIT_OK


def cmd_optimize_inference(args) -> int:
    design, _plan, effect, extras = parse_document(load_config(args.config))
    out = ensure_dir(args.out)
    alpha = extras.get("alpha", 0.05)
    decision = cox_criterion(design, effect=effect, alpha=alpha)
    lines = _header(args)
    lines.append(f"b={decision.b_incident_minus_prevalent:.2f}")
    lines.append(f"b_full_precision={decision.b_incident_minus_prevalent!r}")
    lines.append(f"pi_opt={decision.pi_opt:g}")
    lines.append("optimal_cohort=" + ("100% incident" if decision.pi_opt == 1.0
                                      else "100% prevalent"))
    lines.append(f"incident_side={decision.incident_side!r}")
    lines.append(f"prevalent_side={decision.prevalent_side!r}")
    lines.append(f"expected_failures_at_opt={decision.expected_failures_at_opt!r}")
    power = decision.theoretical_power
    lines.append(f"theoretical_power={'nan' if math.isnan(power) else repr(power)}")
    write_summary(lines, out / "summary.txt")
    (out / "decision.json").write_text(
        json.dumps(decision.to_payload(), indent=2, sort_keys=True, default=str) + "\n")
    print("\n".join(lines))
    return EXIT_OK


def _validate_summary_table1(args, out, reps, lines):
    rows = []
    for theta in TABLE1_THETAS:
        design = baseline_design(theta=theta)
        result = optimize_curve(design)
        pub = TABLE1_PUBLISHED[theta]
        row = {"theta": theta, "pi_opt_theory": result.pi_opt,
               "pi_opt_published": pub["pi_opt"]}
        table = dict(result.are_table)
        row["are_even_theory"] = table[0.5]
        row["are_incident_theory"] = table[1.0]
        row["are_prevalent_theory"] = table[0.0]
        rows.append(row)
        lines.append(
            f"theta={theta:g}: pi_opt={result.pi_opt:.2f} "
            f"(published {pub['pi_opt']:.2f})")
    write_are_table_csv(rows, out / "table1_theory.csv")


def cmd_validate(args) -> int:
    out = ensure_dir(args.out)
    lines = _header(args)
    if args.reproduce:
        reps = args.reps or 2000
        plans = reproduction_plans(args.reproduce, reps=reps, seed=args.seed,
                                   threads=args.threads)
        if args.reproduce == "table1":
            _validate_summary_table1(args, out, reps, lines)
    else:
        if not args.config:
            print("validate needs --config or --reproduce", file=sys.stderr)
            return EXIT_USAGE
        design, plan, _effect, _extras = parse_document(load_config(args.config))
        if plan is None:
            raise ConfigurationError("validate config needs a 'plan' section")
        if args.reps:
            plan = type(plan)(**{**plan.__dict__, "replications": args.reps,
                                 "seed": args.seed, "threads": args.threads})
        plans = {"configured": plan}

    if getattr(args, "dump_cohort", None):
        from .estimators import write_records_csv
        from .simulate import generate_cohort

        first = next(iter(plans.values()))
        rng = np.random.default_rng(np.random.SeedSequence(entropy=args.seed,
                                                           spawn_key=(0,)))
        write_records_csv(args.dump_cohort, generate_cohort(first.design, rng))
        lines.append(f"cohort dump: {args.dump_cohort}")

    for name, plan in plans.items():
        report = run_experiment(plan)
        stem = name.replace("=", "_").replace(".", "p")
        write_report_csv(report, out / f"{stem}.csv")
        lines.append(f"[{name}] experiment={report.experiment} "
                     f"replications={report.replications}")
        for ln in report.summary_lines()[3:]:
            lines.append(f"[{name}] {ln}")
        for row in report.rows:
            if row["statistic"].startswith(("empirical_are", "power")):
                val = row["empirical"]
                val_s = "inf" if (isinstance(val, float) and math.isinf(val)) else f"{val:.4f}"
                lines.append(f"[{name}] pi={row['pi']:g} {row['statistic']}={val_s}")
        if not args.no_figures:
            if report.experiment == "risk_and_variance":
                risk_agreement_figure(report, out / f"{stem}.png")
            elif report.experiment == "failure_counts":
                failure_counts_figure(report, out / f"{stem}.png")
            elif report.experiment == "empirical_power":
                power_figure(report, out / f"{stem}.png")
    write_summary(lines, out / "summary.txt")
    print("\n".join(lines))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "optimize-estimation":
            return cmd_optimize_estimation(args)
        if args.command == "optimize-inference":
            return cmd_optimize_inference(args)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "serve":
            return cmd_serve(args)
        parser.error(f"unknown command {args.command}")
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleDesignError, DegenerateDesignError) as exc:
        print(f"infeasible design: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except Exception as exc:  # numerical or internal failure
        print(f"internal error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
