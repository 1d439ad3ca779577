import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from factories import reference_instance
from hetswitch.baselines import (always_on, coverage_count, heuristic1,
                                 heuristic1_probabilities, heuristic2)
from hetswitch.centralized import solve_exact_small
from hetswitch.flowlp import solve_p3
from hetswitch.instance import Instance, eval_objective, sum_rate
from hetswitch.scenario import ScenarioConfig, generate_scenario


def drop(seed=0, K=30, J=4, **kw):
    sc = generate_scenario(ScenarioConfig(seed=seed, num_users=K, num_sbs=J, **kw))
    return sc, Instance.from_scenario(sc)


def with_users_at(sc, positions):
    """Same drop with user positions overridden (channels untouched)."""
    pos = np.asarray(positions, dtype=float)
    K = pos.shape[0]
    return dataclasses.replace(sc, user_positions=pos, beta_mbs=sc.beta_mbs[:K],
                               beta_interf=sc.beta_interf[:K], gamma_sbs=sc.gamma_sbs[:K])


def test_always_on_without_sbs_is_pure_mbs():
    _, inst = drop(J=0)
    a = always_on(inst)
    assert a == solve_p3(inst, [])


def test_always_on_reference_ee():
    assert eval_objective(reference_instance(), always_on(reference_instance())).ee == \
        pytest.approx(0.2, abs=1e-12)


def test_half_covered_sbs_has_probability_half():
    sc, inst = drop(K=60, J=1, sbs_channels=50)
    centre = sc.sbs_positions[0]
    near = np.tile(centre, (25, 1)) + 1.0
    far = np.tile(centre, (35, 1)) + 400.0
    sc2 = with_users_at(sc, np.vstack([near, far]))
    assert coverage_count(sc2, 0, 150.0) == 25
    assert heuristic1_probabilities(sc2, inst, 150.0)[0] == 0.5


def test_uncovered_sbs_never_on():
    sc, inst = drop(K=5, J=2)
    sc = dataclasses.replace(sc, sbs_positions=np.array([[100.0, 100.0], [900.0, 900.0]]))
    sc2 = with_users_at(sc, np.tile(sc.sbs_positions[0], (5, 1)))
    for seed in range(20):
        assert heuristic1(sc2, inst, seed).y[1] == 0
    assert heuristic2(sc2, inst).y[1] == 0
    assert heuristic2(sc2, inst).y[0] == 1


def test_saturated_sbs_always_on():
    sc, inst = drop(K=10, J=1, sbs_channels=5)
    sc2 = with_users_at(sc, np.tile(sc.sbs_positions[0], (10, 1)))
    for seed in range(20):
        assert heuristic1(sc2, inst, seed).y[0] == 1


def test_one_user_inside_switches_on():
    sc, inst = drop(K=3, J=1)
    pos = np.vstack([sc.sbs_positions[0] + 10.0, [[-5000.0, -5000.0]] * 2])
    sc2 = with_users_at(sc, pos)
    assert heuristic2(sc2, inst).y[0] == 1


def test_dense_drop_heuristic2_near_always_on():
    sc, inst = drop(seed=1, K=100, J=10)
    h2 = heuristic2(sc, inst)
    assert h2.y.sum() >= 8
    ee_h2 = eval_objective(inst, h2).ee
    ee_on = eval_objective(inst, always_on(inst)).ee
    assert abs(ee_h2 - ee_on) <= 0.02 * ee_on


def test_coverage_count_edges():
    sc, _ = drop(K=20, J=3)
    assert coverage_count(sc, 0, 1e-9) == 0
    assert coverage_count(sc, 0, 1e6) == 20
    with pytest.raises(ValueError):
        coverage_count(sc, 0, 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), radius=st.floats(1.0, 800.0))
def test_coverage_matches_direct_recount(seed, radius):
    sc, _ = drop(seed=seed, K=40, J=3)
    for j in range(3):
        count = 0
        for u in sc.user_positions:
            dx, dy = u[0] - sc.sbs_positions[j][0], u[1] - sc.sbs_positions[j][1]
            count += (dx * dx + dy * dy) ** 0.5 <= radius
        assert coverage_count(sc, j, radius) == count


def test_heuristic1_is_deterministic_per_seed():
    sc, inst = drop(seed=5)
    assert heuristic1(sc, inst, 3) == heuristic1(sc, inst, 3)


def test_heuristic1_on_frequency_matches_probability():
    sc, inst = drop(seed=2, K=60, J=4, sbs_channels=50)
    prob = heuristic1_probabilities(sc, inst)
    n = 4000
    hits = np.zeros(4)
    for seed in range(n):
        hits += np.random.default_rng(seed).uniform(size=4) < prob
    # the draw in heuristic1 is exactly this Bernoulli; check the rule too
    assert np.all(np.abs(hits / n - prob) <= 4 * np.sqrt(prob * (1 - prob) / n) + 1e-12)
    ys = np.array([heuristic1(sc, inst, seed).y for seed in range(300)])
    assert np.all(np.abs(ys.mean(axis=0) - prob) <= 4 * np.sqrt(prob * (1 - prob) / 300) + 1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_always_on_has_top_sum_rate_and_exact_top_ee(seed):
    sc, inst = drop(seed=seed, K=15, J=3)
    outs = [heuristic1(sc, inst, seed), heuristic2(sc, inst)]
    on = always_on(inst)
    best = solve_exact_small(inst).ee
    for a in outs + [on]:
        assert sum_rate(inst, on) >= sum_rate(inst, a) - 1e-12
        assert best >= eval_objective(inst, a).ee - 1e-12
