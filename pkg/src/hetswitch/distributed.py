"""
Repeated bidding game between users and BSs.

Every round, each user that is neither waitlisted nor out of options bids
for its most preferred remaining BS; a BS merges the new bids with its
waiting list, keeps the ``S_j`` highest and rejects the rest, and a
rejected user strikes that BS from its list.  Once nobody is left to bid,
each SBS stays ON only if the payments it collects exceed its energy cost,
and the users of switched-off SBSs fall back to the MBS.

Prices are proportional to rates: ``p_kj = alpha * C_kj``.  The MBS rate is
load dependent, so its bid value uses the MBS waiting-list size at the start
of the round as the load estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .instance import Assignment, Instance, mbs_load_factor

TIE_BREAKS = ("lowest_index",)


@dataclass(frozen=True)
class GameConfig:
    price_coefficient: float = 1.0          # alpha, currency per bit/s/Hz
    # kappa, currency per watt; None -> an SBS must collect the payments of
    # profitable_fraction * S_j users at the median SBS rate
    energy_price: float | None = None
    profitable_fraction: float = 0.25
    tie_break: str = "lowest_index"

    def __post_init__(self):
        if self.price_coefficient <= 0:
            raise ValueError("price_coefficient must be positive")
        if self.energy_price is not None and self.energy_price < 0:
            raise ValueError("energy_price must be non-negative")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"tie_break must be one of {TIE_BREAKS}")

    def sbs_costs(self, instance: Instance) -> np.ndarray:
        """Energy cost ``q_j = kappa * P_j`` of every SBS."""
        if self.energy_price is not None:
            kappa = self.energy_price
        else:
            kappa = default_energy_price(instance, self.price_coefficient,
                                         self.profitable_fraction)
        return kappa * instance.powers[1:]


def default_energy_price(instance: Instance, alpha: float = 1.0, fraction: float = 0.25) -> float:
    """kappa making ``fraction * S_j`` median-rate users break even on SBS j."""
    if instance.J == 0 or instance.K == 0:
        return 0.0
    median_rate = float(np.median(instance.rate_sbs))
    need = fraction * instance.capacities[1:] * alpha * median_rate
    return float(np.median(need / instance.powers[1:]))


@dataclass
class GameState:
    instance: Instance
    config: GameConfig
    preference_lists: list[list[int]]
    waiting_lists: list[dict[int, float]]     # per BS: user -> bid
    rejected_from: list[set[int]]
    round: int = 0
    # per round: {user: BS bid for}
    bid_log: list[dict[int, int]] = field(default_factory=list)
    # per round: per BS, the bid a newcomer has to beat after the round; the
    # lowest held bid for a full waiting list, 0 while there is room
    min_bid_log: list[list[float]] = field(default_factory=list)
    # per round: (user utility sum, BS utility sum)
    utility_log: list[tuple[float, float]] = field(default_factory=list)
    converged: bool = False

    def holder(self) -> np.ndarray:
        """BS whose waiting list holds each user, -1 if none."""
        out = np.full(self.instance.K, -1)
        for j, wl in enumerate(self.waiting_lists):
            for k in wl:
                out[k] = j
        return out


class GameReport(NamedTuple):
    rounds: int
    converged: bool
    pre_switch: Assignment          # converged association, every SBS ON
    utility_trace: list             # (round, user utility, BS utility); last row after ON-OFF
    bid_log: list
    min_bid_log: list
    payments: np.ndarray            # per SBS, at convergence
    costs: np.ndarray               # q_j
    held_bids: list                 # per BS: {user: bid} at convergence
    preference_lists: list


class BlockingPair(NamedTuple):
    k: int
    j: int
    reason: str


class ProbeViolation(NamedTuple):
    round: int
    who: str        # "user" or "bs"
    index: int
    detail: str


def _bid_values(instance: Instance, mbs_load: int) -> np.ndarray:
    """(K, J+1) rate a user expects from each BS, MBS at the given load."""
    return instance.column_rates(mbs_load)


def initial_state(instance: Instance, config: GameConfig | None = None) -> GameState:
    config = config or GameConfig()
    values = _bid_values(instance, 0)
    prefs = []
    for k in range(instance.K):
        # descending rate, lower BS index first on ties
        order = sorted(range(instance.J + 1), key=lambda j: (-values[k, j], j))
        prefs.append([j for j in order if values[k, j] > 0])
    return GameState(instance=instance, config=config, preference_lists=prefs,
                     waiting_lists=[{} for _ in range(instance.J + 1)],
                     rejected_from=[set() for _ in range(instance.K)])


def _utilities(state: GameState, y=None) -> tuple[float, float]:
    inst, alpha = state.instance, state.config.price_coefficient
    holder = state.holder()
    load = int(np.sum(holder == 0))
    rates = inst.column_rates(load)
    costs = state.config.sbs_costs(inst)
    users = float(sum(rates[k, j] for k, j in enumerate(holder) if j >= 0))
    bs = 0.0
    for j, wl in enumerate(state.waiting_lists):
        pay = alpha * sum(rates[k, j] for k in wl)
        if j == 0:
            bs += pay
        elif y is None or y[j - 1]:
            bs += pay - costs[j - 1]
    return users, bs


def pending_bids(state: GameState) -> dict[int, int]:
    """Target BS of every user that would bid in the next round."""
    held = state.holder()
    bids = {}
    for k in range(state.instance.K):
        if held[k] >= 0:
            continue
        for j in state.preference_lists[k]:
            if j not in state.rejected_from[k]:
                bids[k] = j
                break
    return bids


def run_round(state: GameState) -> GameState:
    """One bidding round; mutates and returns ``state``.

    The game has converged once no user is left to bid: from then on the
    waiting lists can no longer change.
    """
    inst, alpha = state.instance, state.config.price_coefficient
    values = _bid_values(inst, len(state.waiting_lists[0]))
    bids = pending_bids(state)

    min_bids = []
    for j, wl in enumerate(state.waiting_lists):
        new = {k: alpha * values[k, j] for k, target in bids.items() if target == j}
        if new:
            pool = {**wl, **new}
            # waitlisted bids keep their value; highest first, lower user index on ties
            ranked = sorted(pool.items(), key=lambda kv: (-kv[1], kv[0]))
            keep = dict(ranked[: inst.capacities[j]])
            for k, _ in ranked[inst.capacities[j]:]:
                state.rejected_from[k].add(j)
            state.waiting_lists[j] = keep
        wl = state.waiting_lists[j]
        full = len(wl) >= inst.capacities[j]
        min_bids.append(min(wl.values()) if full and wl else 0.0)

    state.round += 1
    state.bid_log.append(bids)
    state.min_bid_log.append(min_bids)
    state.utility_log.append(_utilities(state))
    state.converged = not pending_bids(state)
    return state


def switch_off_unprofitable(state: GameState) -> tuple[Assignment, np.ndarray, np.ndarray]:
    """ON-OFF rule on a converged game: SBS j stays ON iff payments > q_j.

    Users of switched-off SBSs move to the MBS while it has room (lower user
    index first); the rest stay unassociated.
    """
    inst, alpha = state.instance, state.config.price_coefficient
    K, J = inst.K, inst.J
    x = np.zeros((K, J + 1), dtype=np.int8)
    for j, wl in enumerate(state.waiting_lists):
        for k in wl:
            x[k, j] = 1
    costs = state.config.sbs_costs(inst)
    payments = np.array([alpha * sum(inst.rate_sbs[k, j - 1] for k in state.waiting_lists[j])
                         for j in range(1, J + 1)])
    y = (payments > costs).astype(np.int8)
    spare = inst.capacities[0] - int(x[:, 0].sum())
    for j in np.flatnonzero(y == 0) + 1:
        for k in sorted(state.waiting_lists[j]):
            x[k, j] = 0
            if spare > 0:
                x[k, 0] = 1
                spare -= 1
    return Assignment(x, y), payments, costs


def run_game(instance: Instance, config: GameConfig | None = None) -> tuple[Assignment, GameReport]:
    """Play the game to convergence, then apply the ON-OFF rule."""
    state = initial_state(instance, config)
    limit = instance.K * (instance.J + 1) + 1
    state.converged = not pending_bids(state)
    while not state.converged:
        if state.round >= limit:
            raise AssertionError(f"bidding game did not converge within {limit} rounds")
        run_round(state)

    pre = np.zeros((instance.K, instance.J + 1), dtype=np.int8)
    for j, wl in enumerate(state.waiting_lists):
        for k in wl:
            pre[k, j] = 1
    pre_switch = Assignment(pre, np.ones(instance.J, dtype=np.int8))
    final, payments, costs = switch_off_unprofitable(state)

    trace = [(r + 1, u, b) for r, (u, b) in enumerate(state.utility_log)]
    after = GameState(instance=instance, config=state.config, preference_lists=[],
                      waiting_lists=[{} for _ in range(instance.J + 1)], rejected_from=[])
    for k, j in enumerate(final.serving_bs):
        if j >= 0:
            after.waiting_lists[j][k] = 0.0
    u, b = _utilities(after, final.y)
    trace.append((state.round + 1, u, b))
    report = GameReport(state.round, state.converged, pre_switch, trace,
                        state.bid_log, state.min_bid_log, payments, costs,
                        [dict(wl) for wl in state.waiting_lists], state.preference_lists)
    return final, report


def verify_ne(instance: Instance, config: GameConfig | None, final: Assignment,
              held_bids: list | None = None) -> BlockingPair | None:
    """Search for a user and a BS that would both gain from re-matching.

    ``final`` is the converged association before the ON-OFF step.  User k
    prefers BS j when j sits higher in k's preference list; BS j gains when
    it has room or holds a bid below what k would bid now.  ``held_bids``
    (from the game report) are the bids as submitted; without them the held
    users' bids are re-evaluated at the final MBS load.
    """
    config = config or GameConfig()
    alpha = config.price_coefficient
    now = alpha * _bid_values(instance, final.mbs_load)
    prefs = initial_state(instance, config).preference_lists
    serving = final.serving_bs
    if held_bids is None:
        held_bids = [{int(k): now[k, j] for k in np.flatnonzero(final.x[:, j])}
                     for j in range(instance.J + 1)]
    for k in range(instance.K):
        current = serving[k]
        rank = prefs[k].index(current) if current >= 0 else len(prefs[k])
        for j in prefs[k][:rank]:
            held = held_bids[j]
            if len(held) < instance.capacities[j]:
                return BlockingPair(k, j, "user prefers a BS with spare capacity")
            weakest = min(held, key=lambda u: (held[u], -u))
            if (now[k, j], -k) > (held[weakest], -weakest):
                return BlockingPair(k, j, f"bid beats held user {weakest}")
    return None


def game_monotonicity_probe(trace, preference_lists=None) -> ProbeViolation | None:
    """Check that users bid down their lists and BS admission bids never fall.

    ``trace`` is a ``GameState`` or ``GameReport``; for a bare report-like
    object pass ``preference_lists`` explicitly.
    """
    bid_log, min_bid_log = trace.bid_log, trace.min_bid_log
    if preference_lists is None:
        preference_lists = trace.preference_lists

    last_rank: dict[int, int] = {}
    for r, bids in enumerate(bid_log):
        for k, j in bids.items():
            rank = preference_lists[k].index(j)
            if k in last_rank and rank <= last_rank[k]:
                return ProbeViolation(r + 1, "user", k, f"bid for BS {j} after a less preferred one")
            last_rank[k] = rank

    for r in range(1, len(min_bid_log)):
        for j, (a, b) in enumerate(zip(min_bid_log[r - 1], min_bid_log[r])):
            if b < a - 1e-12:
                return ProbeViolation(r + 1, "bs", j, f"admission bid fell from {a} to {b}")
    return None
