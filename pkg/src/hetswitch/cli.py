"""Command line entry point: ``hetswitch {solve,game,sweep,generate}``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

from . import io
from .baselines import always_on, heuristic1, heuristic2
from .centralized import SolverConfig, SolverReport, _report, solve_boost, solve_exact_small
from .distributed import GameConfig, run_game
from .harness import STRATEGIES, convergence_trace, emit_csv, run_sweep
from .instance import Instance
from .scenario import generate_scenario


def _write_trace(report: SolverReport, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("iteration", "q0", "mu", "y_relaxed", "ee"))
        for i, (q0, mu, y, ee) in enumerate(report.trace, start=1):
            w.writerow((i, repr(float(q0)), repr(float(mu)),
                        " ".join(repr(float(v)) for v in y), repr(float(ee))))


def _load_problem(args):
    """(scenario or None, instance) from --instance or --scenario."""
    if args.scenario:
        scenario = io.load_scenario(args.scenario)
        return scenario, Instance.from_scenario(scenario)
    return None, io.load_instance(args.instance)


def cmd_solve(args) -> int:
    scenario, instance = _load_problem(args)
    strategy = args.strategy or ("exact" if args.mode == "exact" else "boost")
    if strategy in ("h1", "h2") and scenario is None:
        raise SystemExit("h1 and h2 need SBS/user geometry: pass --scenario")
    if strategy == "boost":
        cfg = io.solver_config_from_dict(io.read_document(args.config, "solver_config")) \
            if args.config else SolverConfig()
        report = solve_boost(instance, cfg)
    elif strategy == "exact":
        report = solve_exact_small(instance)
    else:
        if strategy == "game":
            a = run_game(instance, GameConfig())[0]
        elif strategy == "h1":
            a = heuristic1(scenario, instance, args.seed)
        elif strategy == "h2":
            a = heuristic2(scenario, instance)
        else:
            a = always_on(instance)
        report = _report(instance, a, strategy)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.save_report(report, out / "report.json")
    _write_trace(report, out / "trace.csv")
    print(f"{strategy}: ee={report.ee!r} sum_rate={report.sum_rate!r} "
          f"power={report.power!r} on={int(report.assignment.y.sum())}/{instance.J}")
    return 0


def cmd_game(args) -> int:
    _, instance = _load_problem(args)
    config = GameConfig(price_coefficient=args.alpha, energy_price=args.kappa)
    rows = convergence_trace(instance, config, args.out)
    print(f"{len(rows)} rows written to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    spec = io.load_experiment_spec(args.spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, master_seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_sweep(spec)
    if result.rows:
        path = emit_csv(result.rows, out / Path(spec.output).name)
        print(f"{len(result.rows)} rows written to {path}")
    for value, drop, strategy, msg in result.failures:
        print(f"failed: value={value} drop={drop} strategy={strategy}: {msg}", file=sys.stderr)
    return 0 if not result.failures else 1


def cmd_generate(args) -> int:
    cfg = io.load_scenario_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    scenario = generate_scenario(cfg)
    io.save_scenario(scenario, args.scenario_out)
    if args.instance_out:
        io.save_instance(Instance.from_scenario(scenario), args.instance_out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hetswitch", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def problem_args(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--instance", help="instance JSON file")
        g.add_argument("--scenario", help="scenario JSON file (needed by h1/h2)")

    s = sub.add_parser("solve", help="choose ON set and association for one instance")
    problem_args(s)
    s.add_argument("--mode", choices=("boost", "exact"), default="boost")
    s.add_argument("--strategy", choices=STRATEGIES, help="overrides --mode")
    s.add_argument("--config", help="solver_config JSON file")
    s.add_argument("--seed", type=int, default=0, help="h1 random seed")
    s.add_argument("--out", required=True, help="directory for report.json and trace.csv")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("game", help="per-round utility trace of the bidding game")
    problem_args(g)
    g.add_argument("--alpha", type=float, default=1.0, help="price per unit rate")
    g.add_argument("--kappa", type=float, default=None, help="energy price per watt")
    g.add_argument("--out", required=True, help="trace CSV path")
    g.set_defaults(func=cmd_game)

    w = sub.add_parser("sweep", help="Monte-Carlo sweep to CSV")
    w.add_argument("--spec", required=True, help="experiment_spec JSON file")
    w.add_argument("--out", required=True, help="output directory")
    w.add_argument("--seed", type=int, default=None, help="master seed override")
    w.set_defaults(func=cmd_sweep)

    n = sub.add_parser("generate", help="draw a scenario from a scenario_config file")
    n.add_argument("--config", required=True)
    n.add_argument("--seed", type=int, default=None)
    n.add_argument("--scenario-out", required=True)
    n.add_argument("--instance-out")
    n.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
