"""Command-line front end.

Subcommands:
  validate  check a scenario file (and its mode-set file) against the schema
  design    run the scheme's optimizer per sweep point, write designs + report
  eval      analytic metrics per sweep point (reuses a designs file if given)
  simulate  Monte Carlo run of a designs file, write simulated columns
  sweep     design + eval + optional simulate fused, optional figures

Exit codes: 0 success, 1 schema error, 2 infeasible design, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .designer import BracketingError, InfeasibleDesignError
from .quadrature import QuadratureError
from .report import load_designs, save_designs, write_report
from .runner import run_sweep, simulate_point
from .scenario import SchemaError, parse_scenario

EXIT_OK = 0
EXIT_SCHEMA = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3


def _add_common(sub):
    sub.add_argument("scenario", type=Path, help="scenario YAML file")
    sub.add_argument("-o", "--out", type=Path, default=Path("reports"),
                     help="output directory (default: ./reports)")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the scenario's simulation seed")
    sub.add_argument("--frames", type=int, default=None,
                     help="override the scenario's frame count")
    sub.add_argument("--grid", type=int, default=None,
                     help="override the target-PER search grid size")
    sub.add_argument("--workers", type=int, default=1,
                     help="worker threads for sweep points / frame blocks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopamc",
        description="Cross-layer AMC + cooperative ARQ design, analytics "
                    "and simulation")
    subs = parser.add_subparsers(dest="command", required=True)

    v = subs.add_parser("validate", help="validate a scenario file")
    v.add_argument("scenario", type=Path)

    d = subs.add_parser("design", help="optimize designs over the sweep")
    _add_common(d)

    e = subs.add_parser("eval", help="analytic metrics over the sweep")
    _add_common(e)
    e.add_argument("--design", type=Path, default=None,
                   help="designs JSON produced by the design command")

    s = subs.add_parser("simulate", help="Monte Carlo run of existing designs")
    _add_common(s)
    s.add_argument("--design", type=Path, required=True,
                   help="designs JSON produced by the design command")

    w = subs.add_parser("sweep", help="design + eval + optional simulation")
    _add_common(w)
    w.add_argument("--simulate", action="store_true",
                   help="add Monte Carlo columns to the report")
    w.add_argument("--plot", action="store_true",
                   help="render report figures next to the CSV")
    return parser


def _stem(scenario_path: Path, suffix: str) -> str:
    return f"{scenario_path.stem}_{suffix}"


def _load(path: Path):
    try:
        return parse_scenario(path), EXIT_OK
    except SchemaError as exc:
        print("scenario schema errors:", file=sys.stderr)
        for vpath, msg in exc.violations:
            print(f"  {vpath or '<document>'}: {msg}", file=sys.stderr)
        return None, EXIT_SCHEMA
    except (OSError, ValueError) as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return None, EXIT_SCHEMA


def cmd_validate(args) -> int:
    scenario, code = _load(args.scenario)
    if scenario is None:
        return code
    print(f"ok: scheme={scenario.scheme} modes={len(scenario.mode_set)} "
          f"sweep={len(scenario.p_bar_sweep_db)} points "
          f"p_loss={scenario.p_loss}")
    return EXIT_OK


def _infeasible_exit(records) -> int:
    return EXIT_OK if any(r.feasible for r in records) else EXIT_INFEASIBLE


def cmd_design(args) -> int:
    scenario, code = _load(args.scenario)
    if scenario is None:
        return code
    records = run_sweep(scenario, simulate=False, grid_points=args.grid,
                        workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    designs_path = args.out / _stem(args.scenario, "designs.json")
    save_designs(designs_path, scenario, records)
    paths = write_report(args.out, _stem(args.scenario, "design"), records,
                         scenario, seed=args.seed or scenario.seed)
    print(f"wrote {designs_path}")
    print(f"wrote {paths['csv']}")
    for rec in records:
        status = "ok" if rec.feasible else f"infeasible ({rec.reason})"
        print(f"  p_bar={rec.p_bar_db:g} dB: {status}")
    return _infeasible_exit(records)


def cmd_eval(args) -> int:
    scenario, code = _load(args.scenario)
    if scenario is None:
        return code
    if args.design:
        records = load_designs(args.design, scenario)
    else:
        records = run_sweep(scenario, simulate=False, grid_points=args.grid,
                            workers=args.workers)
    paths = write_report(args.out, _stem(args.scenario, "eval"), records,
                         scenario, seed=args.seed or scenario.seed)
    print(f"wrote {paths['csv']}")
    return _infeasible_exit(records)


def cmd_simulate(args) -> int:
    scenario, code = _load(args.scenario)
    if scenario is None:
        return code
    records = load_designs(args.design, scenario)
    frames = args.frames or scenario.frames
    seed = args.seed if args.seed is not None else scenario.seed
    for idx, rec in enumerate(records):
        rec.sim = simulate_point(scenario, rec, frames, seed, idx,
                                 workers=args.workers)
    paths = write_report(args.out, _stem(args.scenario, "sim"), records,
                         scenario, seed=seed)
    print(f"wrote {paths['csv']}")
    return _infeasible_exit(records)


def cmd_sweep(args) -> int:
    scenario, code = _load(args.scenario)
    if scenario is None:
        return code
    seed = args.seed if args.seed is not None else scenario.seed
    records = run_sweep(scenario, simulate=args.simulate, frames=args.frames,
                        seed=seed, grid_points=args.grid, workers=args.workers)
    stem = _stem(args.scenario, "sweep")
    paths = write_report(args.out, stem, records, scenario, seed=seed)
    save_designs(args.out / _stem(args.scenario, "designs.json"),
                 scenario, records)
    print(f"wrote {paths['csv']}")
    if args.plot:
        from .plotting import render_figures
        for p in render_figures([(scenario.scheme, records)], args.out, stem):
            print(f"wrote {p}")
    return _infeasible_exit(records)


_DISPATCH = {
    "validate": cmd_validate,
    "design": cmd_design,
    "eval": cmd_eval,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except InfeasibleDesignError as exc:
        print(f"infeasible design: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (QuadratureError, BracketingError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
