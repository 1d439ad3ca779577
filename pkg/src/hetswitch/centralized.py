"""
Centralized ON-OFF switching and association by dual decomposition.

Three nested projected-subgradient loops:

* inner: for fixed relaxed ``y`` and MBS load target ``q0``, minimize the
  Lagrangian dual over the multipliers ``lam`` (of ``x_kj <= y_j``) and
  ``mu`` (of ``sum_k x_k0 = q0``); every dual evaluation is one assignment
  LP solved exactly by min-cost flow;
* middle: ascend the inner optimum over ``q0``;
* outer: move the relaxed ``y`` along ``nu_j = sum_k lam_kj`` (minus an
  energy price, see ``SolverConfig.y_update``).

After every middle-loop step a binary ON set is read off the inner
association (an SBS is ON iff some user picked it) and re-associated
optimally; the best energy efficiency seen is kept and, unless disabled,
refined by switching single SBSs while that helps.  ``solve_exact_small`` enumerates every
ON set instead and serves as the reference.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .flowlp import AssignmentLP, solve_assignment_lp, solve_p3
from .instance import Assignment, Instance, check_feasible, eval_objective

EXACT_MAX_SBS = 14


@dataclass(frozen=True)
class SolverConfig:
    tau0: float = 0.5
    decay: float = 50.0                # h in tau0 / (1 + t/h)
    constant_step: bool = False
    tol_inner: float = 1e-4
    tol_q0: float = 0.05
    tol_y: float = 1e-3
    max_inner: int = 2000
    max_q0: int = 200
    max_outer: int = 100
    # a loop also stops once its best value has not improved for this many
    # iterations (inner, middle, outer)
    stall_inner: int = 10
    stall_q0: int = 4
    stall_outer: int = 25
    # "full": supergradient of the inner optimum in q0, mu - T'/T * sum_k R_k0 x_k0;
    # "multiplier": mu alone
    q0_gradient: str = "full"
    # "penalized": nu_j - eta * P_j with eta the best energy efficiency so
    # far; "multiplier": nu_j alone (never lowers y)
    y_update: str = "penalized"
    # finish with a single-flip local search around the best ON set found
    polish: bool = True

    def __post_init__(self):
        if self.tau0 <= 0 or self.decay <= 0:
            raise ValueError("tau0 and decay must be positive")
        if min(self.max_inner, self.max_q0, self.max_outer) < 1:
            raise ValueError("iteration limits must be at least 1")
        if self.q0_gradient not in ("full", "multiplier"):
            raise ValueError("q0_gradient must be 'full' or 'multiplier'")
        if self.y_update not in ("penalized", "multiplier"):
            raise ValueError("y_update must be 'penalized' or 'multiplier'")

    def step(self, t: int) -> float:
        if self.constant_step:
            return self.tau0
        return self.tau0 / (1.0 + t / self.decay)


@dataclass
class DualState:
    lam: np.ndarray          # (K, J), >= 0
    mu: float
    q0: float                # in [0, min(K, S_0)]
    y_relaxed: np.ndarray    # (J,), in [0, 1]
    tau: float
    inner_iterations: int = 0
    q0_iterations: int = 0
    outer_iterations: int = 0

    @classmethod
    def initial(cls, instance: Instance, config: SolverConfig | None = None) -> "DualState":
        config = config or SolverConfig()
        return cls(lam=np.zeros((instance.K, instance.J)), mu=0.0,
                   q0=instance.max_mbs_load / 2.0, y_relaxed=np.ones(instance.J),
                   tau=config.tau0)


class InnerResult(NamedTuple):
    x: np.ndarray            # association at the best multipliers
    lam: np.ndarray
    mu: float
    value: float             # dual value at (lam, mu)
    iterations: int
    converged: bool


class Q0Result(NamedTuple):
    q0: float
    inner: InnerResult
    iterations: int
    converged: bool
    on_sets: list            # distinct ON sets read off every inner solution


@dataclass
class SolverReport:
    assignment: Assignment
    ee: float
    sum_rate: float
    power: float
    iterations: dict = field(default_factory=dict)   # inner / q0 / outer totals
    converged: dict = field(default_factory=dict)    # per loop level
    # per outer iteration: (q0, mu, y_relaxed, ee of the extracted ON set)
    trace: list = field(default_factory=list)
    mode: str = "boost"


def p5_weights(instance: Instance, lam, mu: float, q0: float) -> np.ndarray:
    """Per-pair coefficients of the dualized association LP."""
    mbs = (1.0 - q0 * instance.pilot_overhead) * instance.rate_mbs - mu
    return np.column_stack([mbs, instance.rate_sbs - lam])


def solve_p5(instance: Instance, lam, mu: float, q0: float) -> tuple[np.ndarray, float]:
    """Integral optimum ``(x, value)`` of the dualized association LP."""
    w = p5_weights(instance, lam, mu, q0)
    K = instance.K
    # every user on its best column, if positive; exact when no capacity binds
    best = w.argmax(axis=1)
    gain = w[np.arange(K), best]
    chosen = gain > 0
    counts = np.bincount(best[chosen], minlength=w.shape[1])
    if np.all(counts <= instance.capacities):
        x = np.zeros(w.shape, dtype=np.int8)
        x[np.flatnonzero(chosen), best[chosen]] = 1
        return x, float(gain[chosen].sum())
    sol = solve_assignment_lp(AssignmentLP(w, instance.capacities))
    return sol.x, sol.objective


def dual_value(lp_value: float, lam, mu: float, y, q0: float) -> float:
    return float(lp_value + np.dot(np.asarray(lam).sum(axis=0), y) + mu * q0)


def dual_update(lam, mu: float, x, y, q0: float, step_lam: float, step_mu: float):
    """One projected subgradient step on the multipliers.

    ``lam <- [lam + step_lam * (x_kj - y_j)]^+`` and
    ``mu <- mu + step_mu * (sum_k x_k0 - q0)``; both move against the dual
    function's subgradient, so they decrease it for small steps.
    """
    x = np.asarray(x, dtype=float)
    lam_new = np.maximum(0.0, np.asarray(lam, dtype=float)
                         + step_lam * (x[:, 1:] - np.asarray(y, dtype=float)[None, :]))
    mu_new = float(mu + step_mu * (x[:, 0].sum() - q0))
    return lam_new, mu_new


def _scales(instance: Instance) -> tuple[float, float]:
    """Step multipliers putting lam and mu moves in rate units."""
    lam_scale = float(instance.rate_sbs.max()) if instance.rate_sbs.size else 1.0
    r_mean = float(instance.rate_mbs.mean()) if instance.K else 1.0
    mu_scale = max(r_mean, 1e-12) / max(1, instance.max_mbs_load)
    return max(lam_scale, 1e-12), mu_scale


def inner_dual_loop(instance: Instance, y_relaxed, q0: float, state: DualState,
                    config: SolverConfig | None = None) -> InnerResult:
    """Minimize the dual over (lam, mu) for fixed relaxed y and q0.

    Starts from ``state``'s multipliers and leaves the best pair found there
    (warm start for the next call).  The base step ``state.tau`` carries over
    between calls: it halves after a call that never improves on its warm
    start and grows back toward ``tau0`` after one that does.
    """
    config = config or SolverConfig()
    M = instance.max_mbs_load
    if not -1e-12 <= q0 <= M + 1e-12:
        raise ValueError(f"q0={q0} outside [0, {M}]")
    y = np.asarray(y_relaxed, dtype=float)
    lam_scale, mu_scale = _scales(instance)
    lam, mu = state.lam, state.mu
    base = state.tau
    best = None
    since_best = 0
    improved = False
    converged = False
    t = 0
    while t < config.max_inner:
        x, lp_val = solve_p5(instance, lam, mu, q0)
        g = dual_value(lp_val, lam, mu, y, q0)
        if best is None or g < best.value:
            if best is not None:
                improved = True
            significant = best is None or g < best.value - config.tol_inner * max(1.0, abs(best.value))
            best = InnerResult(x, lam, mu, g, 0, False)
            if significant:
                since_best = 0
            else:
                since_best += 1
        else:
            since_best += 1
        tau = base if config.constant_step else base / (1.0 + t / config.decay)
        lam_new, mu_new = dual_update(lam, mu, x, y, q0, tau * lam_scale, tau * mu_scale)
        change = max(float(np.max(np.abs(lam_new - lam), initial=0.0)), abs(mu_new - mu))
        lam, mu = lam_new, mu_new
        t += 1
        if change < config.tol_inner:
            converged = True
            break
        if since_best >= config.stall_inner:
            break
    if not config.constant_step:
        state.tau = min(config.tau0, base * 1.5) if improved else max(base * 0.5, 1e-6)
    state.lam, state.mu = best.lam, best.mu
    state.inner_iterations += t
    return best._replace(iterations=t, converged=converged)


def q0_supergradient(instance: Instance, inner: InnerResult, config: SolverConfig) -> float:
    if config.q0_gradient == "multiplier":
        return inner.mu
    return inner.mu - instance.pilot_overhead * float(np.dot(inner.x[:, 0], instance.rate_mbs))


def q0_loop(instance: Instance, y_relaxed, state: DualState,
            config: SolverConfig | None = None) -> Q0Result:
    """Ascend the inner dual optimum over the MBS load target ``q0``."""
    config = config or SolverConfig()
    M = instance.max_mbs_load
    r_max = float(instance.rate_mbs.max()) if instance.K else 1.0
    q_scale = M / max(2.0 * r_max, 1e-12)
    best, best_q0 = None, state.q0
    on_sets: dict[bytes, np.ndarray] = {}
    since_best = 0
    converged = False
    t = 0
    while t < config.max_q0:
        inner = inner_dual_loop(instance, y_relaxed, state.q0, state, config)
        y_bin = extract_on_set(inner.x)
        on_sets.setdefault(y_bin.tobytes(), y_bin)
        if best is None or inner.value > best.value + 1e-12:
            best, best_q0, since_best = inner, state.q0, 0
        else:
            since_best += 1
        grad = q0_supergradient(instance, inner, config)
        new_q0 = float(np.clip(state.q0 + config.step(t) * q_scale * grad, 0.0, M))
        delta = abs(new_q0 - state.q0)
        state.q0 = new_q0
        t += 1
        if delta < config.tol_q0:
            converged = True
            break
        if since_best >= config.stall_q0:
            break
    state.q0 = best_q0
    state.q0_iterations += t
    return Q0Result(best_q0, best, t, converged, list(on_sets.values()))


def extract_on_set(x) -> np.ndarray:
    """An SBS is ON iff at least one user is associated with it."""
    return (np.asarray(x)[:, 1:].sum(axis=0) > 0).astype(np.int8)


def _report(instance, assignment, mode, **kw) -> SolverReport:
    violation = check_feasible(instance, assignment)
    if violation is not None:  # pragma: no cover - solve_p3 output is feasible
        raise AssertionError(str(violation))
    obj = eval_objective(instance, assignment)
    return SolverReport(assignment, obj.ee, obj.sum_rate, obj.power, mode=mode, **kw)


def outer_y_loop(instance: Instance, state: DualState | None = None,
                 config: SolverConfig | None = None) -> SolverReport:
    """Relaxed ON-OFF ascent with best-extracted-solution tracking."""
    config = config or SolverConfig()
    if instance.J == 0 or instance.K == 0:
        a = solve_p3(instance, np.zeros(instance.J, dtype=np.int8))
        return _report(instance, a, "boost", iterations={"inner": 0, "q0": 0, "outer": 0},
                       converged={"inner": True, "q0": True, "outer": True})
    state = state or DualState.initial(instance, config)

    seen: dict[bytes, tuple[float, Assignment]] = {}
    best_ee, best_a = -np.inf, None
    since_best = 0
    trace = []
    converged = {"inner": True, "q0": True, "outer": False}
    t = 0
    while t < config.max_outer:
        res = q0_loop(instance, state.y_relaxed, state, config)
        converged["q0"] &= res.converged
        converged["inner"] &= res.inner.converged

        improved = False
        ee = -np.inf
        for y_bin in res.on_sets:
            key = y_bin.tobytes()
            if key not in seen:
                a = solve_p3(instance, y_bin)
                seen[key] = (eval_objective(instance, a).ee, a)
            cand_ee, a = seen[key]
            ee = max(ee, cand_ee)
            if cand_ee > best_ee + 1e-12:
                best_ee, best_a, improved = cand_ee, a, True
        since_best = 0 if improved else since_best + 1
        trace.append((state.q0, res.inner.mu, state.y_relaxed.copy(), ee))

        nu = res.inner.lam.sum(axis=0)
        if config.y_update == "penalized":
            grad = nu - best_ee * instance.powers[1:]
        else:
            grad = nu
        scale = float(np.max(np.abs(grad)))
        new_y = state.y_relaxed
        if scale > 0:
            new_y = np.clip(state.y_relaxed + config.step(t) * grad / scale, 0.0, 1.0)
        delta = float(np.max(np.abs(new_y - state.y_relaxed)))
        state.y_relaxed = new_y
        t += 1
        state.outer_iterations = t
        if delta < config.tol_y:
            converged["outer"] = True
            break
        if since_best >= config.stall_outer:
            break

    flips = 0
    if config.polish:
        best_a, flips = _flip_search(instance, best_a, best_ee, seen)

    return _report(instance, best_a, "boost",
                   iterations={"inner": state.inner_iterations, "q0": state.q0_iterations,
                               "outer": state.outer_iterations, "flips": flips},
                   converged=converged, trace=trace)


def _flip_search(instance: Instance, start: Assignment, start_ee: float,
                 seen: dict) -> tuple[Assignment, int]:
    """Best-improvement search over ON sets one switch away; ``seen`` caches
    (ee, assignment) by ON-set bytes."""
    best_a, best_ee, flips = start, start_ee, 0
    while True:
        cand_a, cand_ee = None, best_ee
        for j in range(instance.J):
            y = best_a.y.copy()
            y[j] ^= 1
            key = y.tobytes()
            if key not in seen:
                a = solve_p3(instance, y)
                seen[key] = (eval_objective(instance, a).ee, a)
            ee, a = seen[key]
            if ee > cand_ee + 1e-12:
                cand_a, cand_ee = a, ee
        if cand_a is None:
            return best_a, flips
        best_a, best_ee, flips = cand_a, cand_ee, flips + 1


def solve_boost(instance: Instance, config: SolverConfig | None = None) -> SolverReport:
    return outer_y_loop(instance, None, config)


def solve_exact_small(instance: Instance, max_sbs: int = EXACT_MAX_SBS) -> SolverReport:
    """Best ON set by enumerating all ``2**J`` of them."""
    J = instance.J
    if J > max_sbs:
        raise ValueError(f"exact enumeration limited to J <= {max_sbs}, got J={J}")
    best_ee, best_a = -np.inf, None
    for bits in itertools.product((0, 1), repeat=J):
        a = solve_p3(instance, np.array(bits, dtype=np.int8))
        ee = eval_objective(instance, a).ee
        if ee > best_ee + 1e-15:
            best_ee, best_a = ee, a
    n = 2 ** J
    return _report(instance, best_a, "exact", iterations={"enumerated": n},
                   converged={"exact": True})
