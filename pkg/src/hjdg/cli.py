"""``hjdg`` command line: solve, diagnose, sweep, report.

Exit codes: 0 success, 2 hypothesis violation, 3 solver failure.  When a
sweep has both kinds of failure the solver code wins, since a failed
solve means no numbers exist at all for that point.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiment
from .diagnostics import HypothesisViolation, oscillation_profile
from .grid import GridError, GridField
from .problem import load_config, problem_from_config, validate_problem
from .solver import SchemeConfig, SolverError, format_meta, residual_visc_field, solve

EXIT_OK, EXIT_HYPOTHESIS, EXIT_SOLVER = 0, 2, 3


def _cmd_solve(args) -> int:
    spec = problem_from_config(load_config(args.config))
    problems = validate_problem(spec)
    for msg in problems:
        print(f"hypothesis: {msg}", file=sys.stderr)
    if problems and not args.probe:
        return EXIT_HYPOTHESIS
    u = solve(spec, SchemeConfig(backend=args.backend))
    out = Path(args.out or Path(args.config).with_suffix(".bin"))
    u.save(out)
    out.with_suffix(".meta.txt").write_text(format_meta(u.meta))
    print(f"wrote {out} substeps={u.meta['substeps']} max_gradient={u.meta['max_gradient']!r}")
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    spec = problem_from_config(load_config(args.config))
    u = GridField.load(args.checkpoint)
    if u.grid != spec.grid:
        raise GridError("checkpoint grid does not match the config grid")
    res = residual_visc_field(u, spec)
    tol = args.tol if args.tol is not None else 10 * (spec.grid.h + spec.grid.dt)
    bad = float(np.mean(res < -tol))
    print(f"viscosity residual: min={float(res.min())!r} fraction below -{tol!r} = {bad!r}")
    settings = experiment.OscillationSettings(beta1=args.beta1, k_max=args.levels)
    for t_c, x_c in experiment.oscillation_centers(spec, settings, 0):
        w, _ = experiment.normalize_field(u, spec, (t_c, x_c), settings)
        prof = oscillation_profile(w, settings.alpha1, settings.resolved_beta1(), settings.k_max, p=spec.p)
        sys.stdout.write(prof.to_csv())
    return EXIT_OK


def _cmd_sweep(args) -> int:
    plan = experiment.ExperimentPlan.load(args.plan)
    if args.workers is not None:
        plan.workers = args.workers
    if args.out is not None:
        plan.out_dir = args.out
    report = experiment.run_holder_experiment(plan)
    for key, val in report.summary().items():
        print(f"{key}={val!r}")
    statuses = {r.status for r in report.rows}
    for r in report.rows:
        if r.status != experiment.OK:
            print(f"{r.point.label}: {r.status}: {r.message}", file=sys.stderr)
    if statuses & {experiment.SOLVER, experiment.ERROR}:
        return EXIT_SOLVER
    if experiment.HYPOTHESIS in statuses:
        return EXIT_HYPOTHESIS
    return EXIT_OK


def _cmd_report(args) -> int:
    rows = experiment.read_holder_csv(Path(args.dir) / "holder.csv")
    fits = [r for r in rows if r["status"] == experiment.OK and r["degenerate"] is False]
    summary = experiment.summarize(fits)
    print(f"points={len({r['point'] for r in rows})} rows={len(rows)}")
    for key, val in summary.items():
        print(f"{key}={val!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hjdg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one config and write a checkpoint")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--backend", choices=("cython", "numpy"))
    p.add_argument("--probe", action="store_true", help="solve even when hypotheses fail")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("diagnose", help="residual census and oscillation profile of a checkpoint")
    p.add_argument("config")
    p.add_argument("checkpoint")
    p.add_argument("--tol", type=float)
    p.add_argument("--beta1", type=float, default=0.8)
    p.add_argument("--levels", type=int, default=30)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("sweep", help="run an experiment plan")
    p.add_argument("plan")
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="summarize a finished sweep directory")
    p.add_argument("dir")
    p.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HypothesisViolation, GridError) as exc:
        print(f"hypothesis: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except SolverError as exc:
        print(f"solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
