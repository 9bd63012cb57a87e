"""Command-line front end.

`fsuc run <experiment>` executes one study over a case file and writes its
table and figure into the output directory.  Exit status: 0 on success, 2
when the run completed but some hours needed the security-slack fallback,
1 on a fault.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .coretypes import STANDARDS
from .experiments import (EXPERIMENTS, ExperimentSpec, run_cost_split,
                          run_efr_sweep, run_inertia_hist,
                          run_reliability_compare, run_week_profile,
                          write_cost_split, write_efr_sweep,
                          write_inertia_hist, write_reliability,
                          write_week_profile)
from .ingest import bundled_case_path

_ENV_TIME_LIMIT = "FSUC_TIME_LIMIT"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fsuc",
        description="Frequency-secured stochastic unit commitment studies.")
    sub = p.add_subparsers(dest="command", required=True)

    cases = sub.add_parser("cases", help="list case files shipped with the "
                                         "package")
    cases.set_defaults(func=_cmd_cases)

    run = sub.add_parser("run", help="run one study and write its outputs")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--case", default=None,
                     help="case file path (default: bundled gb2030)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--steps", type=int, default=168,
                     help="hours per seasonal segment (default 168)")
    run.add_argument("--seed", type=int, default=None,
                     help="profile seed override")
    run.add_argument("--horizon", type=int, default=None,
                     help="rolling look-ahead hours (default: from the case)")
    run.add_argument("--efr-caps", type=float, nargs="+",
                     default=[500.0, 1000.0, 1500.0], metavar="MW",
                     help="EFR procurement caps for efr_sweep")
    run.add_argument("--efr-cap", type=float, default=1500.0, metavar="MW",
                     help="EFR cap held fixed in reliability_compare")
    run.add_argument("--standards", nargs="+", choices=STANDARDS,
                     default=list(STANDARDS),
                     help="reliability standards to compare")
    run.add_argument("--n2-p-loss", type=float, default=2800.0, metavar="MW",
                     help="loss secured against under the N-2 standard")
    run.add_argument("--rocof", type=float, default=None, metavar="HZ_S",
                     help="RoCoF limit override on secured runs")
    run.add_argument("--unsecured", action="store_true",
                     help="run the energy-only variant where applicable")
    run.add_argument("--full-year", action="store_true",
                     help="one contiguous year instead of four weeks")
    run.add_argument("--backend", choices=("auto", "scipy", "bundled"),
                     default="auto")
    run.add_argument("--time-limit", type=float, default=None, metavar="S",
                     help=f"per-solve wall clock limit (or ${_ENV_TIME_LIMIT})")
    run.set_defaults(func=_cmd_run)
    return p


def _cmd_cases(args: argparse.Namespace) -> int:
    data_dir = bundled_case_path().parent
    for path in sorted(data_dir.glob("*.yaml")):
        print(path.stem)
    return 0


def _time_limit(args: argparse.Namespace):
    if args.time_limit is not None:
        return args.time_limit
    raw = os.environ.get(_ENV_TIME_LIMIT)
    return float(raw) if raw else None


def _cmd_run(args: argparse.Namespace) -> int:
    case = args.case or str(bundled_case_path())
    spec = ExperimentSpec(
        case_path=case, experiment=args.experiment, out_dir=args.out,
        steps=args.steps, seed=args.seed, efr_caps=tuple(args.efr_caps),
        standards=tuple(args.standards), rocof=args.rocof,
        unsecured=args.unsecured, full_year=args.full_year,
        n2_p_loss=args.n2_p_loss, horizon=args.horizon,
        backend=args.backend, time_limit=_time_limit(args))

    cache: dict = {}
    if spec.experiment == "cost_split":
        report = run_cost_split(spec, cache)
        paths = write_cost_split(report, spec.out_dir)
        print(f"secured {report.secured_cost:.0f} GBP, energy-only "
              f"{report.unsecured_cost:.0f} GBP, ancillary "
              f"{report.ancillary_cost:.0f} GBP ({100 * report.share:.1f}%)")
    elif spec.experiment == "inertia_hist":
        report = run_inertia_hist(spec, cache)
        paths = write_inertia_hist(report, spec.out_dir)
        modes = ", ".join(f"{m:.1f}" for m in report.modes)
        print(f"{report.hours} h scheduled; min inertia "
              f"{report.min_inertia:.1f} GVA.s; modes at {modes} GVA.s")
    elif spec.experiment == "week_profile":
        report = run_week_profile(spec, cache)
        paths = write_week_profile(report, spec.out_dir)
        print(f"{report.surplus_hours} surplus hours, "
              f"{report.signature_hours} curtailing with synchronous "
              f"units committed")
    elif spec.experiment == "efr_sweep":
        report = run_efr_sweep(spec, cache)
        paths = write_efr_sweep(report, spec.out_dir)
        for cap, _, anc in report.rows:
            print(f"EFR cap {cap:.0f} MW: ancillary {anc:.0f} GBP")
    else:
        report = run_reliability_compare(spec, cache, efr_cap=args.efr_cap)
        paths = write_reliability(report, spec.out_dir)
        for std, _, anc, loss, _ in report.rows:
            print(f"{std}: ancillary {anc:.0f} GBP, "
                  f"mean loss {loss:.0f} MW")

    for path in paths:
        print(f"wrote {Path(path)}")
    if report.fallback_hours:
        print(f"warning: {report.fallback_hours} hour(s) fell back to the "
              f"security slack", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
