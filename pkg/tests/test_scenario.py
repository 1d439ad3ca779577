import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hetswitch.scenario import (ConfigurationError, ScenarioConfig, generate_scenario,
                                interferer_centers, mbs_sinr, path_loss_db, sbs_sinr,
                                small_cell_sinr)


def test_same_seed_gives_identical_drop():
    cfg = ScenarioConfig(seed=7, num_sbs=5, num_users=40)
    assert generate_scenario(cfg).equals(generate_scenario(cfg))


def test_different_seed_changes_drop():
    a = generate_scenario(ScenarioConfig(seed=7, num_sbs=3, num_users=10))
    b = generate_scenario(ScenarioConfig(seed=8, num_sbs=3, num_users=10))
    assert not np.array_equal(a.user_positions, b.user_positions)


def test_zero_users_gives_empty_arrays():
    sc = generate_scenario(ScenarioConfig(num_users=0, num_sbs=3))
    assert sc.user_positions.shape == (0, 2)
    assert sc.gamma_sbs.shape == (0, 3)
    assert sc.beta_mbs.shape == (0,)


def test_adding_sbs_extends_drop():
    small = generate_scenario(ScenarioConfig(seed=3, num_sbs=2, num_users=20))
    large = generate_scenario(ScenarioConfig(seed=3, num_sbs=6, num_users=20))
    np.testing.assert_array_equal(large.sbs_positions[:2], small.sbs_positions)
    np.testing.assert_array_equal(large.gamma_sbs[:, :2], small.gamma_sbs)
    np.testing.assert_array_equal(large.beta_mbs, small.beta_mbs)


def test_subarea_poisson_mean_user_count():
    cfg = ScenarioConfig(user_distribution="subarea_poisson", num_users=100, num_sbs=0,
                         num_interferers=1)
    totals = [generate_scenario(dataclasses.replace(cfg, seed=s)).num_users
              for s in range(10_000)]
    assert abs(np.mean(totals) - 100) <= 3.0


def test_subarea_users_stay_inside_area():
    sc = generate_scenario(ScenarioConfig(user_distribution="subarea_poisson", seed=1))
    assert np.all(sc.user_positions >= 0) and np.all(sc.user_positions <= 1000)


def test_mbs_sinr_direct_substitution():
    sc = generate_scenario(ScenarioConfig(num_users=1, num_sbs=0, num_interferers=2))
    sc = dataclasses.replace(sc, beta_mbs=np.array([2.0]), beta_interf=np.array([[1.0, 1.0]]))
    assert mbs_sinr(sc, 0) == pytest.approx(2.0, rel=1e-15)


def test_mbs_sinr_symmetric_single_interferer():
    sc = generate_scenario(ScenarioConfig(num_users=1, num_sbs=0, num_interferers=1))
    sc = dataclasses.replace(sc, beta_interf=sc.beta_mbs.reshape(1, 1).copy())
    assert mbs_sinr(sc, 0) == pytest.approx(1.0, rel=1e-15)


def test_mbs_sinr_matches_independent_formula():
    sc = generate_scenario(ScenarioConfig(seed=11, num_users=50, num_sbs=2))
    for k in range(sc.num_users):
        num = sc.beta_mbs[k] ** 2
        den = sum(b * b for b in sc.beta_interf[k])
        assert mbs_sinr(sc, k) == pytest.approx(num / den, rel=1e-12)


def test_no_interferers_is_a_configuration_error():
    sc = generate_scenario(ScenarioConfig(num_users=3, num_sbs=1, num_interferers=0))
    with pytest.raises(ConfigurationError):
        mbs_sinr(sc)


def test_colocated_user_has_maximum_sbs_sinr():
    cfg = ScenarioConfig(shadowing_std_db=0.0, num_users=30, num_sbs=1, seed=4)
    sc = generate_scenario(cfg)
    pos = sc.user_positions.copy()
    pos[5] = sc.sbs_positions[0]
    d = np.linalg.norm(pos - sc.sbs_positions[0], axis=1)
    gamma = small_cell_sinr(cfg, d)
    assert gamma.argmax() == 5


def test_doubling_distance_divides_sinr_by_16():
    cfg = ScenarioConfig(small_pl_exponent=4.0)
    assert small_cell_sinr(cfg, 50.0) / small_cell_sinr(cfg, 100.0) == pytest.approx(16.0)


def test_path_loss_clamps_min_distance():
    assert path_loss_db(0.0, 37.0, 4.0, 1.0) == path_loss_db(1.0, 37.0, 4.0, 1.0) == 37.0


def test_zero_shadowing_is_deterministic_in_distance():
    cfg = ScenarioConfig(shadowing_std_db=0.0, num_users=20, num_sbs=3, seed=2)
    sc = generate_scenario(cfg)
    for j in range(3):
        d = np.linalg.norm(sc.user_positions - sc.sbs_positions[j], axis=1)
        np.testing.assert_allclose(sc.gamma_sbs[:, j], small_cell_sinr(cfg, d), rtol=1e-12)
        assert sbs_sinr(sc, 0, j) == sc.gamma_sbs[0, j]


def test_interferers_on_ring():
    cfg = ScenarioConfig(interferer_distance=1500.0)
    d = np.linalg.norm(interferer_centers(cfg) - 500.0, axis=1)
    np.testing.assert_allclose(d, 1500.0)


@pytest.mark.parametrize("kw", [dict(area_side=0), dict(pilot_overhead=1.0),
                                dict(pilot_overhead=0.0), dict(mbs_capacity=0),
                                dict(sbs_power_w=0.0), dict(user_distribution="grid")])
def test_invalid_config_rejected(kw):
    with pytest.raises(ConfigurationError):
        ScenarioConfig(**kw)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), K=st.integers(0, 40), J=st.integers(0, 6),
       layout=st.sampled_from(["uniform", "subarea_poisson"]))
def test_gains_positive_and_finite(seed, K, J, layout):
    sc = generate_scenario(ScenarioConfig(seed=seed, num_users=K, num_sbs=J,
                                          user_distribution=layout))
    for arr in (sc.beta_mbs, sc.beta_interf, sc.gamma_sbs):
        assert np.all(arr > 0) and np.all(np.isfinite(arr))
    assert sc.gamma_sbs.shape == (sc.num_users, J)
