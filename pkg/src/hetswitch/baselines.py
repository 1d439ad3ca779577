"""Benchmark ON-OFF strategies.  All of them associate users with the
rate-optimal fixed-y solver once the ON set is chosen."""
from __future__ import annotations

import numpy as np

from .flowlp import solve_p3
from .instance import Assignment, Instance
from .scenario import Scenario

DEFAULT_COVERAGE_RADIUS = 150.0


def coverage_count(scenario: Scenario, j: int, radius: float = DEFAULT_COVERAGE_RADIUS) -> int:
    """Number of users within ``radius`` meters of SBS ``j``."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    d = np.linalg.norm(scenario.user_positions - scenario.sbs_positions[j], axis=1)
    return int(np.count_nonzero(d <= radius))


def _coverage_counts(scenario: Scenario, radius: float) -> np.ndarray:
    return np.array([coverage_count(scenario, j, radius) for j in range(scenario.num_sbs)], dtype=int)


def always_on(instance: Instance) -> Assignment:
    return solve_p3(instance, np.ones(instance.J, dtype=np.int8))


def heuristic1_probabilities(scenario: Scenario, instance: Instance,
                             radius: float = DEFAULT_COVERAGE_RADIUS) -> np.ndarray:
    """ON probability ``min(theta_j / S_j, 1)`` of every SBS."""
    theta = _coverage_counts(scenario, radius)
    return np.minimum(theta / instance.capacities[1:], 1.0)


def heuristic1(scenario: Scenario, instance: Instance, seed: int,
               radius: float = DEFAULT_COVERAGE_RADIUS) -> Assignment:
    """Switch each SBS ON at random, more likely the more users it covers."""
    prob = heuristic1_probabilities(scenario, instance, radius)
    draws = np.random.default_rng(seed).uniform(size=instance.J)
    y = (draws < prob).astype(np.int8)
    return solve_p3(instance, y)


def heuristic2(scenario: Scenario, instance: Instance,
               radius: float = DEFAULT_COVERAGE_RADIUS) -> Assignment:
    """Switch ON every SBS with at least one user in range."""
    y = (_coverage_counts(scenario, radius) > 0).astype(np.int8)
    return solve_p3(instance, y)
