"""
Random network drops for a two-tier massive-MIMO HetNet.

One macro BS (MBS) sits at the centre of a square area, small-cell BSs
(SBS) and users are scattered over it.  The MBS link quality is
pilot-contamination limited: each user has one co-pilot user in every
neighbouring macrocell, and the uplink SINR is

    gamma_k0 = beta_k0**2 / sum_l beta_kl**2

with ``beta`` the amplitude gain (path loss and shadowing).  SBS links are
noise limited over one of the ``S_j`` FDMA channels.

Randomness is drawn from independent per-entity streams so that a drop with
more SBSs (or more users, for the uniform layout) extends a smaller drop
with the same seed instead of replacing it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

USER_DISTRIBUTIONS = ("uniform", "subarea_poisson")

# spawn keys of the independent random streams
_USERS_UNIFORM, _USERS_NORMAL, _SBS, _SUBAREAS = 0, 1, 2, 3


class ConfigurationError(ValueError):
    """Raised for parameter combinations the channel model cannot handle."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry, channel and system parameters of one network drop.

    Distances are in meters, powers of BSs in watts, gains in dB unless the
    field name says otherwise.  ``num_users`` is the user count for the
    uniform layout and the expected total (split evenly over the subareas)
    for ``subarea_poisson``.
    """

    area_side: float = 1000.0
    num_sbs: int = 10
    num_users: int = 100
    user_distribution: str = "uniform"
    num_subareas: int = 8
    # std-dev of a subarea's user cluster, as a fraction of the subarea width
    hotspot_spread: float = 0.2

    tx_power_dbm: float = 40.0
    bandwidth_hz: float = 1e6
    pilot_overhead: float = 0.002
    mbs_capacity: int = 100
    sbs_channels: int = 50
    mbs_power_w: float = 200.0
    sbs_power_w: float = 1.0

    macro_pl_ref_db: float = 15.3
    macro_pl_exponent: float = 3.76
    small_pl_ref_db: float = 37.0
    small_pl_exponent: float = 4.0
    shadowing_std_db: float = 8.0
    noise_density_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0
    min_distance: float = 1.0

    num_interferers: int = 6
    interferer_distance: float = 1000.0
    # radius of the disc around each neighbouring MBS holding its co-pilot user
    interferer_radius: float = 500.0

    seed: int = 0

    def __post_init__(self):
        if self.area_side <= 0:
            raise ConfigurationError("area_side must be positive")
        if not 0 < self.pilot_overhead < 1:
            raise ConfigurationError("pilot_overhead must lie in (0, 1)")
        if self.mbs_capacity < 1 or self.sbs_channels < 1:
            raise ConfigurationError("capacities must be at least 1")
        if self.mbs_power_w <= 0 or self.sbs_power_w <= 0:
            raise ConfigurationError("BS powers must be positive")
        if self.num_sbs < 0 or self.num_users < 0:
            raise ConfigurationError("num_sbs and num_users must be non-negative")
        if self.user_distribution not in USER_DISTRIBUTIONS:
            raise ConfigurationError(
                f"unknown user_distribution {self.user_distribution!r}; "
                f"expected one of {USER_DISTRIBUTIONS}")
        if self.num_interferers < 0:
            raise ConfigurationError("num_interferers must be non-negative")
        if self.min_distance <= 0:
            raise ConfigurationError("min_distance must be positive")

    @property
    def noise_dbm(self) -> float:
        """Thermal noise power over one SBS channel."""
        channel_bw = self.bandwidth_hz / self.sbs_channels
        return self.noise_density_dbm_hz + 10 * np.log10(channel_bw) + self.noise_figure_db


@dataclass(frozen=True, eq=False)
class Scenario:
    config: ScenarioConfig
    mbs_position: np.ndarray
    sbs_positions: np.ndarray     # (J, 2)
    user_positions: np.ndarray    # (K, 2)
    beta_mbs: np.ndarray          # (K,) amplitude gain user -> MBS
    beta_interf: np.ndarray       # (K, L) amplitude gains of the co-pilot users
    gamma_sbs: np.ndarray         # (K, J) linear SINR of user k at SBS j
    interferer_positions: np.ndarray = field(default=None)  # (K, L, 2)

    @property
    def num_users(self) -> int:
        return self.user_positions.shape[0]

    @property
    def num_sbs(self) -> int:
        return self.sbs_positions.shape[0]

    def equals(self, other: "Scenario") -> bool:
        """Field-by-field exact comparison."""
        if self.config != other.config:
            return False
        names = ("mbs_position", "sbs_positions", "user_positions", "beta_mbs",
                 "beta_interf", "gamma_sbs", "interferer_positions")
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in names)


def path_loss_db(distance, ref_db: float, exponent: float, min_distance: float = 1.0):
    """Log-distance path loss ``ref_db + 10*exponent*log10(d / 1 m)``."""
    d = np.maximum(np.asarray(distance, dtype=float), min_distance)
    return ref_db + 10.0 * exponent * np.log10(d)


def amplitude_gain(loss_db):
    return 10.0 ** (-np.asarray(loss_db, dtype=float) / 20.0)


def small_cell_sinr(config: ScenarioConfig, distance, shadowing_db=0.0):
    """Noise-limited linear SINR of an SBS link at the given distance."""
    loss = path_loss_db(distance, config.small_pl_ref_db, config.small_pl_exponent,
                        config.min_distance) + shadowing_db
    return 10.0 ** ((config.tx_power_dbm - loss - config.noise_dbm) / 10.0)


def interferer_centers(config: ScenarioConfig) -> np.ndarray:
    """Neighbouring macrocell sites on a hexagonal ring around the MBS."""
    L = config.num_interferers
    centre = np.full(2, config.area_side / 2.0)
    angles = np.pi / 6 + 2 * np.pi * np.arange(L) / max(L, 1)
    ring = config.interferer_distance * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return centre + ring.reshape(L, 2)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _subarea_grid(n: int) -> tuple[int, int]:
    cols = int(np.ceil(np.sqrt(n)))
    while n % cols:
        cols += 1
    return cols, n // cols


def _place_users(config: ScenarioConfig, uniforms: np.ndarray) -> np.ndarray:
    if config.user_distribution == "uniform":
        return config.area_side * uniforms[: config.num_users, :2]

    rng = _stream(config.seed, _SUBAREAS)
    cols, rows = _subarea_grid(config.num_subareas)
    width, height = config.area_side / cols, config.area_side / rows
    mean = config.num_users / config.num_subareas
    counts = rng.poisson(mean, size=config.num_subareas)
    hotspots = rng.uniform(size=(config.num_subareas, 2))
    blocks = []
    for s in range(config.num_subareas):
        origin = np.array([(s % cols) * width, (s // cols) * height])
        size = np.array([width, height])
        centre = origin + size * hotspots[s]
        pts = centre + rng.normal(scale=config.hotspot_spread * size, size=(counts[s], 2))
        blocks.append(np.clip(pts, origin, origin + size))
    return np.concatenate(blocks) if blocks else np.zeros((0, 2))


def generate_scenario(config: ScenarioConfig) -> Scenario:
    """Draw one network drop.

    The same config (seed included) always yields a bit-identical drop.
    """
    L = config.num_interferers
    centre = np.full(2, config.area_side / 2.0)

    if config.user_distribution == "uniform":
        K = config.num_users
        user_pos = None
    else:
        user_pos = _place_users(config, None)
        K = user_pos.shape[0]

    # per-user draws, row-major so that the first K rows never depend on K
    uniforms = _stream(config.seed, _USERS_UNIFORM).uniform(size=(K, 2 + 2 * L))
    normals = _stream(config.seed, _USERS_NORMAL).normal(size=(K, 1 + L))
    if user_pos is None:
        user_pos = _place_users(config, uniforms)

    sigma = config.shadowing_std_db
    d0 = np.linalg.norm(user_pos - centre, axis=1)
    beta_mbs = amplitude_gain(
        path_loss_db(d0, config.macro_pl_ref_db, config.macro_pl_exponent,
                     config.min_distance) + sigma * normals[:, 0])

    # co-pilot users uniform over a disc around each neighbouring MBS
    radius = config.interferer_radius * np.sqrt(uniforms[:, 2:2 + L])
    theta = 2 * np.pi * uniforms[:, 2 + L:2 + 2 * L]
    offsets = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=-1)
    interf_pos = interferer_centers(config)[None, :, :] + offsets
    d_l = np.linalg.norm(interf_pos - centre, axis=-1)
    beta_interf = amplitude_gain(
        path_loss_db(d_l, config.macro_pl_ref_db, config.macro_pl_exponent,
                     config.min_distance) + sigma * normals[:, 1:])

    J = config.num_sbs
    sbs_pos = np.zeros((J, 2))
    gamma = np.zeros((K, J))
    for j in range(J):
        rng = _stream(config.seed, _SBS, j)
        sbs_pos[j] = config.area_side * rng.uniform(size=2)
        shadow = sigma * rng.normal(size=K)
        dist = np.linalg.norm(user_pos - sbs_pos[j], axis=1)
        gamma[:, j] = small_cell_sinr(config, dist, shadow)

    return Scenario(config=config, mbs_position=centre, sbs_positions=sbs_pos,
                    user_positions=user_pos, beta_mbs=beta_mbs,
                    beta_interf=beta_interf, gamma_sbs=gamma,
                    interferer_positions=interf_pos)


def mbs_sinr(scenario: Scenario, k=None):
    """Pilot-contamination limited SINR of user ``k`` at the MBS.

    With ``k=None`` the whole vector is returned.
    """
    if scenario.beta_interf.shape[1] == 0:
        raise ConfigurationError(
            "MBS SINR needs at least one co-pilot interferer (num_interferers=0)")
    sl = slice(None) if k is None else k
    signal = scenario.beta_mbs[sl] ** 2
    interference = np.sum(scenario.beta_interf[sl] ** 2, axis=-1)
    return signal / interference


def sbs_sinr(scenario: Scenario, k: int, j: int) -> float:
    return float(scenario.gamma_sbs[k, j])
