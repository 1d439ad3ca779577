"""JSON files for configs, drops, instances and solver reports.

Every document is an object with a ``"kind"`` tag and a ``"version"``.
Floats are written with Python's shortest round-trip repr, so reading a
file back reproduces the arrays bit for bit.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .centralized import SolverConfig, SolverReport
from .distributed import GameConfig
from .instance import Assignment, Instance
from .scenario import Scenario, ScenarioConfig

FORMAT_VERSION = 1


class FormatError(ValueError):
    """A file does not hold the expected kind of document."""


def _array(a) -> list:
    return np.asarray(a).tolist()


def _frozen_to_dict(obj) -> dict:
    return dataclasses.asdict(obj)


def _frozen_from_dict(cls, data: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise FormatError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return cls(**data)


def scenario_config_to_dict(config: ScenarioConfig) -> dict:
    return _frozen_to_dict(config)


def scenario_config_from_dict(data: dict) -> ScenarioConfig:
    return _frozen_from_dict(ScenarioConfig, data)


def solver_config_from_dict(data: dict) -> SolverConfig:
    return _frozen_from_dict(SolverConfig, data)


def game_config_from_dict(data: dict) -> GameConfig:
    return _frozen_from_dict(GameConfig, data)


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "config": scenario_config_to_dict(scenario.config),
        "mbs_position": _array(scenario.mbs_position),
        "sbs_positions": _array(scenario.sbs_positions),
        "user_positions": _array(scenario.user_positions),
        "beta_mbs": _array(scenario.beta_mbs),
        "beta_interf": _array(scenario.beta_interf),
        "gamma_sbs": _array(scenario.gamma_sbs),
        "interferer_positions": _array(scenario.interferer_positions),
    }


def scenario_from_dict(data: dict) -> Scenario:
    config = scenario_config_from_dict(data["config"])
    K, J = len(data["user_positions"]), len(data["sbs_positions"])
    L = config.num_interferers

    def arr(name, shape):
        return np.asarray(data[name], dtype=float).reshape(shape)

    return Scenario(config=config, mbs_position=arr("mbs_position", (2,)),
                    sbs_positions=arr("sbs_positions", (J, 2)),
                    user_positions=arr("user_positions", (K, 2)),
                    beta_mbs=arr("beta_mbs", (K,)), beta_interf=arr("beta_interf", (K, L)),
                    gamma_sbs=arr("gamma_sbs", (K, J)),
                    interferer_positions=arr("interferer_positions", (K, L, 2)))


def instance_to_dict(instance: Instance) -> dict:
    return {
        "rate_mbs": _array(instance.rate_mbs),
        "rate_sbs": _array(instance.rate_sbs),
        "pilot_overhead": instance.pilot_overhead,
        "capacities": _array(instance.capacities),
        "powers": _array(instance.powers),
    }


def instance_from_dict(data: dict) -> Instance:
    K = len(data["rate_mbs"])
    J = len(data["capacities"]) - 1
    return Instance(rate_mbs=np.asarray(data["rate_mbs"], dtype=float),
                    rate_sbs=np.asarray(data["rate_sbs"], dtype=float).reshape(K, J),
                    pilot_overhead=float(data["pilot_overhead"]),
                    capacities=data["capacities"], powers=data["powers"])


def assignment_to_dict(a: Assignment) -> dict:
    return {"x": _array(a.x), "y": _array(a.y)}


def report_to_dict(report: SolverReport) -> dict:
    return {
        "mode": report.mode,
        "ee": report.ee,
        "sum_rate": report.sum_rate,
        "power": report.power,
        "assignment": assignment_to_dict(report.assignment),
        "iterations": dict(report.iterations),
        "converged": {k: bool(v) for k, v in report.converged.items()},
    }


def write_document(path, kind: str, payload: dict) -> None:
    path = Path(path)
    doc = {"kind": kind, "version": FORMAT_VERSION, **payload}
    try:
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_document(path, kind: str) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("kind") != kind:
        raise FormatError(f"{path}: expected a {kind!r} document")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {doc.get('version')!r}")
    return {k: v for k, v in doc.items() if k not in ("kind", "version")}


def save_instance(instance: Instance, path) -> None:
    write_document(path, "instance", instance_to_dict(instance))


def load_instance(path) -> Instance:
    return instance_from_dict(read_document(path, "instance"))


def save_scenario(scenario: Scenario, path) -> None:
    write_document(path, "scenario", scenario_to_dict(scenario))


def load_scenario(path) -> Scenario:
    return scenario_from_dict(read_document(path, "scenario"))


def save_scenario_config(config: ScenarioConfig, path) -> None:
    write_document(path, "scenario_config", scenario_config_to_dict(config))


def load_scenario_config(path) -> ScenarioConfig:
    return scenario_config_from_dict(read_document(path, "scenario_config"))


def save_report(report: SolverReport, path) -> None:
    write_document(path, "solver_report", report_to_dict(report))


def experiment_spec_from_dict(data: dict):
    """Build an ``ExperimentSpec``; nested configs are plain objects."""
    from .harness import ExperimentSpec

    data = dict(data)
    nested = {"base": scenario_config_from_dict, "solver": solver_config_from_dict,
              "game": game_config_from_dict}
    for name, build in nested.items():
        if name in data:
            data[name] = build(data[name])
    return _frozen_from_dict(ExperimentSpec, data)


def experiment_spec_to_dict(spec) -> dict:
    out = _frozen_to_dict(spec)
    out["sweep_values"] = list(spec.sweep_values)
    out["strategies"] = list(spec.strategies)
    return out


def load_experiment_spec(path):
    return experiment_spec_from_dict(read_document(path, "experiment_spec"))


def save_experiment_spec(spec, path) -> None:
    write_document(path, "experiment_spec", experiment_spec_to_dict(spec))
