"""
Monte-Carlo sweeps over the number of SBSs or users.

Drop ``d`` of a sweep uses the same scenario seed at every sweep value, and
the scenario generator extends a drop rather than redrawing it when SBSs or
users are added.  Neighbouring sweep points therefore share their geometry
(common random numbers), which keeps trends in J or K free of drop-to-drop
noise.
"""
from __future__ import annotations

import csv
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .baselines import DEFAULT_COVERAGE_RADIUS, always_on, heuristic1, heuristic2
from .centralized import SolverConfig, solve_boost, solve_exact_small
from .distributed import GameConfig, run_game
from .instance import Instance, eval_objective
from .scenario import ScenarioConfig, generate_scenario

log = logging.getLogger(__name__)

STRATEGIES = ("boost", "game", "h1", "h2", "always_on", "exact")
SWEEP_VARIABLES = ("num_sbs", "num_users")
CSV_COLUMNS = ("sweep_value", "strategy", "mean_ee", "mean_sum_rate", "mean_power",
               "mean_on_count", "drops", "stderr_ee")

# spawn-key tags separating the seed streams of one drop
_SCENARIO_STREAM, _H1_STREAM = 0, 1


@dataclass(frozen=True)
class ExperimentSpec:
    sweep_variable: str = "num_sbs"
    sweep_values: tuple = (2, 4, 6, 8, 10, 12, 14, 16, 18, 20)
    drops: int = 100
    strategies: tuple = ("boost", "game", "h1", "h2", "always_on")
    user_distribution: str = "uniform"
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    output: str = "results.csv"
    master_seed: int = 0
    coverage_radius: float = DEFAULT_COVERAGE_RADIUS
    solver: SolverConfig = field(default_factory=SolverConfig)
    game: GameConfig = field(default_factory=GameConfig)

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(int(v) for v in self.sweep_values))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep_variable must be one of {SWEEP_VARIABLES}")
        if self.drops < 1:
            raise ValueError("drops must be at least 1")
        if not self.sweep_values or min(self.sweep_values) <= 0:
            raise ValueError("sweep values must be positive")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown or not self.strategies:
            raise ValueError(f"strategies must be a nonempty subset of {STRATEGIES}")

    def scenario_config(self, value: int, drop: int) -> ScenarioConfig:
        return dataclasses.replace(self.base, **{self.sweep_variable: value},
                                   user_distribution=self.user_distribution,
                                   seed=drop_seed(self.master_seed, drop, _SCENARIO_STREAM))


class ResultRow(NamedTuple):
    sweep_value: int
    strategy: str
    mean_ee: float
    mean_sum_rate: float
    mean_power: float
    mean_on_count: float
    drops: int
    stderr_ee: float


class DropRecord(NamedTuple):
    sweep_value: int
    drop: int
    strategy: str
    ee: float
    sum_rate: float
    power: float
    on_count: int


class SweepResult(NamedTuple):
    rows: list            # ResultRow, ordered by (value, strategy order)
    records: list         # DropRecord of every successful run
    failures: list        # (value, drop, strategy, message)


def drop_seed(master_seed: int, drop: int, stream: int) -> int:
    """64-bit seed of one random stream of one drop."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(drop, stream))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_strategy(name: str, scenario, instance: Instance, spec: ExperimentSpec, drop: int):
    """Assignment chosen by one strategy on one drop."""
    if name == "boost":
        return solve_boost(instance, spec.solver).assignment
    if name == "exact":
        return solve_exact_small(instance).assignment
    if name == "game":
        return run_game(instance, spec.game)[0]
    if name == "h1":
        return heuristic1(scenario, instance, drop_seed(spec.master_seed, drop, _H1_STREAM),
                          spec.coverage_radius)
    if name == "h2":
        return heuristic2(scenario, instance, spec.coverage_radius)
    if name == "always_on":
        return always_on(instance)
    raise ValueError(f"unknown strategy {name!r}")


def aggregate(records: list, value: int, strategy: str) -> ResultRow | None:
    mine = [r for r in records if r.sweep_value == value and r.strategy == strategy]
    if not mine:
        return None
    ee = np.array([r.ee for r in mine])
    n = len(mine)
    stderr = float(ee.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ResultRow(value, strategy, float(ee.mean()),
                     float(np.mean([r.sum_rate for r in mine])),
                     float(np.mean([r.power for r in mine])),
                     float(np.mean([r.on_count for r in mine])), n, stderr)


def run_sweep(spec: ExperimentSpec) -> SweepResult:
    """Evaluate every strategy on every (sweep value, drop) pair.

    A strategy that raises on one drop is logged, recorded in ``failures``
    and left out of that point's averages; the sweep carries on.
    """
    records, failures = [], []
    for value in spec.sweep_values:
        for drop in range(spec.drops):
            try:
                scenario = generate_scenario(spec.scenario_config(value, drop))
                instance = Instance.from_scenario(scenario)
            except Exception as exc:  # noqa: BLE001 - one bad drop must not end the sweep
                log.warning("drop %d at %s=%d failed to build: %s", drop,
                            spec.sweep_variable, value, exc)
                failures.extend((value, drop, s, str(exc)) for s in spec.strategies)
                continue
            for name in spec.strategies:
                try:
                    a = run_strategy(name, scenario, instance, spec, drop)
                    obj = eval_objective(instance, a)
                except Exception as exc:  # noqa: BLE001
                    log.warning("strategy %s failed on drop %d at %s=%d: %s", name, drop,
                                spec.sweep_variable, value, exc)
                    failures.append((value, drop, name, str(exc)))
                    continue
                records.append(DropRecord(value, drop, name, obj.ee, obj.sum_rate,
                                          obj.power, int(a.y.sum())))
    rows = [row for value in spec.sweep_values for name in spec.strategies
            if (row := aggregate(records, value, name)) is not None]
    return SweepResult(rows, records, failures)


def _format(v) -> str:
    # repr is locale independent and round-trips floats exactly
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def emit_csv(table, path) -> Path:
    """Write ``ResultRow``s as CSV; refuses an empty table."""
    rows = list(table)
    if not rows:
        raise ValueError("emit_csv needs at least one row")
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for row in rows:
                w.writerow([_format(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def read_csv(path) -> list:
    """Inverse of ``emit_csv``."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [ResultRow(int(r["sweep_value"]), r["strategy"], float(r["mean_ee"]),
                          float(r["mean_sum_rate"]), float(r["mean_power"]),
                          float(r["mean_on_count"]), int(r["drops"]), float(r["stderr_ee"]))
                for r in reader]


def convergence_trace(instance: Instance, config: GameConfig | None = None, path=None) -> list:
    """Per-round (round, user utility, BS utility) of the bidding game.

    The last row is the state after the ON-OFF step.  Written as CSV when
    ``path`` is given.
    """
    _, report = run_game(instance, config)
    rows = [(int(r), float(u), float(b)) for r, u, b in report.utility_trace]
    if path is not None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("round", "user_utility", "bs_utility"))
            for r, u, b in rows:
                w.writerow((r, repr(u), repr(b)))
    return rows
