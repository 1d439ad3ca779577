"""
Exact integral solutions of the user-association LPs.

The association polytope (each user on at most one BS, per-BS capacities,
optionally an exact MBS load) has a totally unimodular constraint matrix, so
the LP optimum is attained at a 0/1 vertex.  We never solve it as a generic
LP: it is a transportation problem and is solved as a min-cost flow by
successive shortest paths, which yields that 0/1 vertex directly.

A cheap certificate is tried first: dropping the SBS capacities leaves a
problem solvable by sorting, whose optimum is an upper bound.  When that
optimum happens to respect the capacities it is optimal for the full problem
and the flow solver is skipped.  Without an exact MBS load the problem is
also a rectangular assignment once every BS is split into one slot per
channel, which a compiled Hungarian-type solver handles much faster than the
pure-Python flow code.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .instance import Assignment, Instance, mbs_load_factor, sum_rate

COST_TOL = 1e-12


class InfeasibleLoadError(ValueError):
    """The requested exact MBS load cannot be met."""


@dataclass(frozen=True, eq=False)
class AssignmentLP:
    """max sum(w * x) s.t. row sums <= 1, column sums <= capacity,
    and optionally column 0 summing to exactly ``mbs_exact_load``."""

    weights: np.ndarray            # (K, J+1)
    col_capacity: np.ndarray       # (J+1,)
    mbs_exact_load: int | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2:
            raise ValueError("weights must be a (K, J+1) matrix")
        caps = np.asarray(self.col_capacity, dtype=int)
        if caps.shape != (w.shape[1],):
            raise ValueError("col_capacity needs one entry per column")
        if np.any(caps < 0):
            raise ValueError("capacities must be non-negative")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "col_capacity", caps)


class LPSolution(NamedTuple):
    x: np.ndarray
    objective: float


class FlowNetwork:
    """Residual graph for min-cost flow with successive shortest paths.

    Arcs are stored in flat lists; arc ``a`` and its reverse ``a ^ 1`` are
    always adjacent.
    """

    def __init__(self, num_nodes: int):
        self.n = num_nodes
        self.adj: list[list[int]] = [[] for _ in range(num_nodes)]
        self.head: list[int] = []
        self.cap: list[int] = []
        self.cost: list[float] = []
        self.potential = [0.0] * num_nodes

    def add_arc(self, u: int, v: int, capacity: int, cost: float) -> int:
        a = len(self.head)
        self.head += [v, u]
        self.cap += [capacity, 0]
        self.cost += [cost, -cost]
        self.adj[u].append(a)
        self.adj[v].append(a + 1)
        return a

    def flow(self, a: int) -> int:
        return self.cap[a ^ 1]

    def _bellman_ford(self, source: int) -> None:
        # potentials for the current residual graph (tolerates negative arcs)
        dist = [np.inf] * self.n
        dist[source] = 0.0
        for _ in range(self.n):
            changed = False
            for u in range(self.n):
                du = dist[u]
                if du == np.inf:
                    continue
                for a in self.adj[u]:
                    if self.cap[a] > 0:
                        nd = du + self.cost[a]
                        v = self.head[a]
                        if nd < dist[v] - COST_TOL:
                            dist[v] = nd
                            changed = True
            if not changed:
                break
        finite = [d for d in dist if d != np.inf]
        top = max(finite) if finite else 0.0
        self.potential = [d if d != np.inf else top for d in dist]

    def _dijkstra(self, source: int):
        pot = self.potential
        dist = [np.inf] * self.n
        parent = [-1] * self.n
        dist[source] = 0.0
        heap = [(0.0, source)]
        done = [False] * self.n
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            pu = pot[u]
            for a in self.adj[u]:
                if self.cap[a] <= 0:
                    continue
                v = self.head[a]
                if done[v]:
                    continue
                reduced = self.cost[a] + pu - pot[v]
                if reduced < 0.0:
                    reduced = 0.0     # float noise only; potentials keep arcs >= 0
                nd = d + reduced
                if nd < dist[v] - COST_TOL:
                    dist[v] = nd
                    parent[v] = a
                    heapq.heappush(heap, (nd, v))
        return dist, parent

    def successive_shortest_paths(self, source: int, sink: int, max_units: int,
                                  negative_only: bool = False) -> tuple[int, float]:
        """Push up to ``max_units`` along cheapest paths.

        With ``negative_only`` augmentation stops at the first path whose
        true cost is not negative (the flow value is then cost-optimal).
        Returns (units pushed, total cost of those units).
        """
        self._bellman_ford(source)
        pushed, total = 0, 0.0
        while pushed < max_units:
            dist, parent = self._dijkstra(source)
            if dist[sink] == np.inf:
                break
            path_cost = dist[sink] + self.potential[sink] - self.potential[source]
            if negative_only and path_cost >= -COST_TOL:
                break
            bottleneck = max_units - pushed
            v = sink
            while v != source:
                a = parent[v]
                bottleneck = min(bottleneck, self.cap[a])
                v = self.head[a ^ 1]
            v = sink
            while v != source:
                a = parent[v]
                self.cap[a] -= bottleneck
                self.cap[a ^ 1] += bottleneck
                v = self.head[a ^ 1]
            pushed += bottleneck
            total += bottleneck * path_cost
            top = max(d for d in dist if d != np.inf)
            self.potential = [p + (d if d != np.inf else top)
                              for p, d in zip(self.potential, dist)]
        return pushed, total

    def edge_list(self) -> str:
        """Plain-text dump: one ``u v capacity cost flow`` line per forward arc."""
        lines = []
        for a in range(0, len(self.head), 2):
            u, v = self.head[a + 1], self.head[a]
            lines.append(f"{u} {v} {self.cap[a] + self.cap[a + 1]} {self.cost[a]!r} {self.flow(a)}")
        return "\n".join(lines) + "\n"


def build_network(lp: AssignmentLP) -> tuple[FlowNetwork, dict]:
    """Source -> users -> BSs -> sink network for an assignment LP.

    Node layout: source 0, users ``1..K``, BSs ``K+1..K+J+1``, sink last.
    The MBS -> sink arc is omitted when an exact MBS load is requested; that
    load is routed into the MBS node as a separate first phase instead.
    """
    K, n_cols = lp.weights.shape
    source, sink = 0, K + n_cols + 1
    net = FlowNetwork(K + n_cols + 2)
    pair_arcs = {}
    for k in range(K):
        net.add_arc(source, 1 + k, 1, 0.0)
    for k in range(K):
        for j in range(n_cols):
            if lp.col_capacity[j] > 0:
                pair_arcs[k, j] = net.add_arc(1 + k, 1 + K + j, 1, -lp.weights[k, j])
    for j in range(n_cols):
        if j == 0 and lp.mbs_exact_load is not None:
            continue
        if lp.col_capacity[j] > 0:
            net.add_arc(1 + K + j, sink, int(lp.col_capacity[j]), 0.0)
    return net, {"source": source, "sink": sink, "pairs": pair_arcs, "mbs": 1 + K}


def _solve_by_flow(lp: AssignmentLP) -> np.ndarray:
    K, n_cols = lp.weights.shape
    net, ids = build_network(lp)
    m = lp.mbs_exact_load
    if m is not None and m > 0:
        pushed, _ = net.successive_shortest_paths(ids["source"], ids["mbs"], m)
        if pushed < m:
            raise InfeasibleLoadError(f"only {pushed} of {m} users can reach the MBS")
    net.successive_shortest_paths(ids["source"], ids["sink"], K, negative_only=True)
    x = np.zeros((K, n_cols), dtype=np.int8)
    for (k, j), a in ids["pairs"].items():
        if net.flow(a):
            x[k, j] = 1
    return x


def _solve_by_matching(lp: AssignmentLP) -> np.ndarray:
    """Capacity-expanded assignment; only valid without an exact MBS load."""
    K, n_cols = lp.weights.shape
    slots = np.minimum(lp.col_capacity, K)
    owner = np.repeat(np.arange(n_cols), slots)
    # one private "unassigned" slot per user, worth zero
    gain = np.concatenate([lp.weights[:, owner], np.full((K, K), -np.inf)], axis=1)
    gain[np.arange(K), owner.size + np.arange(K)] = 0.0
    gain = np.where(np.isfinite(gain), gain, -1e300)
    rows, cols = linear_sum_assignment(gain, maximize=True)
    x = np.zeros((K, n_cols), dtype=np.int8)
    real = cols < owner.size
    x[rows[real], owner[cols[real]]] = 1
    # a zero-weight pair is interchangeable with staying unassigned
    x[lp.weights <= 0] = 0
    return x


def _relaxed_certificate(lp: AssignmentLP) -> np.ndarray | None:
    """Optimum of the LP without SBS capacities, if it respects them anyway."""
    w, caps = lp.weights, lp.col_capacity
    K, n_cols = w.shape
    x = np.zeros((K, n_cols), dtype=np.int8)
    if K == 0:
        return x
    m = lp.mbs_exact_load
    if m is None:
        masked = np.where(caps[None, :] > 0, w, -np.inf)
        best = masked.argmax(axis=1)
        gain = masked[np.arange(K), best]
        chosen = gain > 0
        x[np.flatnonzero(chosen), best[chosen]] = 1
    else:
        masked = np.where(caps[None, 1:] > 0, w[:, 1:], -np.inf)
        if n_cols > 1:
            best = masked.argmax(axis=1)
            alt = np.maximum(0.0, masked[np.arange(K), best])
        else:
            best = np.zeros(K, dtype=int)
            alt = np.zeros(K)
        on_mbs = np.zeros(K, dtype=bool)
        on_mbs[np.argsort(alt - w[:, 0], kind="stable")[:m]] = True
        x[on_mbs, 0] = 1
        rest = ~on_mbs & (alt > 0)
        x[np.flatnonzero(rest), best[rest] + 1] = 1
    if np.all(x.sum(axis=0) <= caps):
        return x
    return None


def solve_assignment_lp(lp: AssignmentLP, method: str = "auto") -> LPSolution:
    """Exact 0/1 optimum of an assignment LP.

    ``method="flow"`` always runs the min-cost-flow solver; ``"auto"``
    first tries the capacity-relaxed certificate, then the slot assignment
    when no exact MBS load is imposed, then the flow solver.
    """
    K, n_cols = lp.weights.shape
    m = lp.mbs_exact_load
    if m is not None and not 0 <= m <= min(K, lp.col_capacity[0]):
        raise InfeasibleLoadError(
            f"exact MBS load {m} outside [0, min(K={K}, S_0={lp.col_capacity[0]})]")
    x = None
    if method == "auto":
        x = _relaxed_certificate(lp)
        if x is None and m is None:
            x = _solve_by_matching(lp)
    elif method != "flow":
        raise ValueError(f"unknown method {method!r}")
    if x is None:
        x = _solve_by_flow(lp)
    return LPSolution(x, float(np.sum(lp.weights * x)))


def p3_lp(instance: Instance, y, mbs_load: int) -> AssignmentLP:
    """Association LP for fixed ON-OFF vector ``y`` and exact MBS load."""
    y = np.asarray(y, dtype=int)
    w = instance.column_rates(mbs_load)
    caps = instance.capacities * np.r_[1, y]
    return AssignmentLP(w, caps, mbs_load)


def solve_p3(instance: Instance, y, method: str = "auto") -> Assignment:
    """Rate-optimal association for a fixed ON-OFF vector.

    Every MBS load ``m`` in ``0..min(K, S_0)`` is considered; the MBS column
    weight at load ``m`` is ``(1 - m*T'/T) * R_k0``.  Loads are visited in
    order of a capacity-relaxed upper bound and the search stops once no
    remaining bound can beat the best exact value found.
    """
    y = np.asarray(y, dtype=int).reshape(-1)
    K, J = instance.K, instance.J
    if y.shape != (J,):
        raise ValueError(f"y must have {J} entries")
    if K == 0:
        return Assignment(np.zeros((0, J + 1), dtype=np.int8), y)

    M = instance.max_mbs_load
    loads = np.arange(M + 1)
    sbs = np.where(y[None, :] > 0, instance.rate_sbs, -np.inf)
    alt = np.maximum(0.0, sbs.max(axis=1)) if J else np.zeros(K)
    diff = mbs_load_factor(instance, loads)[:, None] * instance.rate_mbs[None, :] - alt[None, :]
    order = np.argsort(-diff, axis=1, kind="stable")
    gains = np.cumsum(np.take_along_axis(diff, order, axis=1), axis=1)
    bound = alt.sum() + np.r_[0.0, gains[np.arange(1, M + 1), np.arange(M)]]

    best_x, best_val = None, -np.inf
    for m in np.argsort(-bound, kind="stable"):
        if bound[m] < best_val + COST_TOL:
            break
        if method == "auto":
            # a capacity-feasible relaxed optimum attains its bound, which no
            # later load can exceed
            x = _relaxed_certificate(p3_lp(instance, y, int(m)))
            if x is not None:
                return Assignment(x, y)
        sol = solve_assignment_lp(p3_lp(instance, y, int(m)), method="flow")
        if sol.objective > best_val + COST_TOL:
            best_x, best_val = sol.x, sol.objective
    return Assignment(best_x, y)


def p3_value(instance: Instance, y) -> float:
    """Optimal sum rate for a fixed ON-OFF vector."""
    return sum_rate(instance, solve_p3(instance, y))
