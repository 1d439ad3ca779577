"""
Problem data shared by every solver: per-user rates, BS capacities and
powers, and the energy-efficiency objective over a joint (x, y) decision.

Column 0 of every ``(K, J+1)`` matrix is the MBS, columns ``1..J`` the SBSs.
Rates are in bit/s/Hz (log base 2).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .scenario import Scenario, mbs_sinr


class FeasibilityError(ValueError):
    def __init__(self, violation: "Violation"):
        super().__init__(str(violation))
        self.violation = violation


class Violation(NamedTuple):
    constraint: str      # "binary", "one_bs_per_user", "capacity" or "on_off"
    k: int | None
    j: int | None
    detail: str

    def __str__(self):
        return f"{self.constraint} violated (k={self.k}, j={self.j}): {self.detail}"


class Objective(NamedTuple):
    sum_rate: float
    power: float
    ee: float


@dataclass(frozen=True, eq=False)
class Instance:
    rate_mbs: np.ndarray      # (K,)  R_k0 = log2(1 + gamma_k0)
    rate_sbs: np.ndarray      # (K, J) C_kj = log2(1 + gamma_kj) / S_j
    pilot_overhead: float     # T'/T
    capacities: np.ndarray    # (J+1,) S_0..S_J
    powers: np.ndarray        # (J+1,) P_0..P_J

    def __post_init__(self):
        for name in ("rate_mbs", "rate_sbs", "powers"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        object.__setattr__(self, "capacities", np.asarray(self.capacities, dtype=int))
        K = self.rate_mbs.shape[0]
        if self.rate_sbs.ndim != 2:
            object.__setattr__(self, "rate_sbs", self.rate_sbs.reshape(K, -1))
        J = self.rate_sbs.shape[1]
        if self.rate_sbs.shape[0] != K:
            raise ValueError("rate_sbs must have one row per user")
        if self.capacities.shape != (J + 1,) or self.powers.shape != (J + 1,):
            raise ValueError("capacities and powers need J+1 entries (MBS first)")
        if np.any(self.rate_mbs < 0) or np.any(self.rate_sbs < 0):
            raise ValueError("rates must be non-negative")
        if not (np.all(np.isfinite(self.rate_mbs)) and np.all(np.isfinite(self.rate_sbs))):
            raise ValueError("rates must be finite")
        if np.any(self.capacities < 1):
            raise ValueError("capacities must be at least 1")
        if np.any(self.powers <= 0):
            raise ValueError("powers must be positive")
        if not 0 < self.pilot_overhead < 1:
            raise ValueError("pilot_overhead must lie in (0, 1)")
        if self.pilot_overhead * self.max_mbs_load >= 1:
            warnings.warn(
                f"pilot_overhead * min(K, S_0) = {self.pilot_overhead * self.max_mbs_load:.3g} >= 1;"
                " MBS rates saturate at zero before the capacity is reached",
                RuntimeWarning, stacklevel=2)

    @property
    def K(self) -> int:
        return self.rate_mbs.shape[0]

    @property
    def J(self) -> int:
        return self.rate_sbs.shape[1]

    @property
    def max_mbs_load(self) -> int:
        return int(min(self.K, self.capacities[0]))

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "Instance":
        cfg = scenario.config
        J = scenario.num_sbs
        caps = np.r_[cfg.mbs_capacity, np.full(J, cfg.sbs_channels)]
        powers = np.r_[cfg.mbs_power_w, np.full(J, cfg.sbs_power_w)]
        if scenario.num_users:
            r0 = np.log2(1.0 + mbs_sinr(scenario))
        else:
            r0 = np.zeros(0)
        rs = np.log2(1.0 + scenario.gamma_sbs) / caps[1:]
        return cls(rate_mbs=r0, rate_sbs=rs.reshape(scenario.num_users, J),
                   pilot_overhead=cfg.pilot_overhead, capacities=caps, powers=powers)

    def column_rates(self, mbs_load) -> np.ndarray:
        """``(K, J+1)`` per-link rates with the MBS column at the given load."""
        return np.column_stack([mbs_load_factor(self, mbs_load) * self.rate_mbs, self.rate_sbs])


@dataclass(frozen=True, eq=False)
class Assignment:
    x: np.ndarray   # (K, J+1) 0/1
    y: np.ndarray   # (J,) 0/1

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.int8))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.int8).reshape(-1))

    @classmethod
    def empty(cls, K: int, J: int) -> "Assignment":
        return cls(np.zeros((K, J + 1), dtype=np.int8), np.zeros(J, dtype=np.int8))

    @property
    def mbs_load(self) -> int:
        return int(self.x[:, 0].sum())

    @property
    def serving_bs(self) -> np.ndarray:
        """BS index per user, -1 when unassociated."""
        if self.x.shape[0] == 0:
            return np.zeros(0, dtype=int)
        return np.where(self.x.any(axis=1), self.x.argmax(axis=1), -1)

    def __eq__(self, other):
        return (isinstance(other, Assignment) and np.array_equal(self.x, other.x)
                and np.array_equal(self.y, other.y))


def mbs_load_factor(instance: Instance, mbs_load) -> float:
    """Pilot-overhead factor ``1 - load*T'/T``, floored at zero."""
    return np.maximum(0.0, 1.0 - np.asarray(mbs_load, dtype=float) * instance.pilot_overhead)


def mbs_user_rate(instance: Instance, mbs_load: int, k: int) -> float:
    if not 0 <= mbs_load <= instance.capacities[0]:
        raise ValueError(f"mbs_load {mbs_load} outside [0, S_0={instance.capacities[0]}]")
    return float(mbs_load_factor(instance, mbs_load) * instance.rate_mbs[k])


def load_penalty(rate_mbs, pilot_overhead: float, x_mbs) -> float:
    """Quadratic MBS-load term ``-(T'/T) * sum(x) * sum(x * R)`` of the sum rate."""
    x_mbs = np.asarray(x_mbs, dtype=float)
    return -pilot_overhead * x_mbs.sum() * float(np.dot(x_mbs, rate_mbs))


def check_feasible(instance: Instance, a: Assignment) -> Violation | None:
    """First violated constraint of the joint problem, or ``None``."""
    K, J = instance.K, instance.J
    x, y = a.x, a.y
    if x.shape != (K, J + 1) or y.shape != (J,):
        raise ValueError(f"assignment shape {x.shape}/{y.shape} does not match K={K}, J={J}")
    if np.any((x != 0) & (x != 1)) or np.any((y != 0) & (y != 1)):
        return Violation("binary", None, None, "x and y must be 0/1")
    rows = x.sum(axis=1)
    bad = np.flatnonzero(rows > 1)
    if bad.size:
        k = int(bad[0])
        return Violation("one_bs_per_user", k, None, f"user served by {rows[k]} BSs")
    cols = x.sum(axis=0)
    bad = np.flatnonzero(cols > instance.capacities)
    if bad.size:
        j = int(bad[0])
        return Violation("capacity", None, j,
                         f"{cols[j]} users exceed capacity {instance.capacities[j]}")
    off = (x[:, 1:] == 1) & (y[None, :] == 0)
    if off.any():
        k, j = np.argwhere(off)[0]
        return Violation("on_off", int(k), int(j) + 1, "user attached to a switched-off SBS")
    return None


def sum_rate(instance: Instance, a: Assignment) -> float:
    load = a.mbs_load
    mbs = mbs_load_factor(instance, load) * float(np.dot(a.x[:, 0], instance.rate_mbs))
    return float(mbs + np.sum(a.x[:, 1:] * instance.rate_sbs))


def total_power(instance: Instance, y) -> float:
    return float(instance.powers[0] + np.dot(np.asarray(y, dtype=float), instance.powers[1:]))


def eval_objective(instance: Instance, a: Assignment) -> Objective:
    """Sum rate, consumed power and their ratio for a feasible assignment."""
    violation = check_feasible(instance, a)
    if violation is not None:
        raise FeasibilityError(violation)
    rate = sum_rate(instance, a)
    power = total_power(instance, a.y)
    return Objective(rate, power, rate / power)
