"""Geometric multipath simulator for dynamic V2V channels.

Produces labeled power delay profile sequences with two controllable levels
of temporal non-stationarity: "weak" (sparse scatterers, slow platforms) and
"strong" (dense scatterers, fast platforms). Propagation is single-bounce:
a fixed-delay LOS tap plus scatterer taps whose delays drift as the Tx/Rx
pair drives along the street.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from chanforge.datasets import ChannelDataset, Pdp, make_manifest

C_MPS = 299_792_458.0  # speed of light, m/s

WEAK = "weak"
STRONG = "strong"

# Category defaults: platform speed (m/s) and static scatterer count.
_CATEGORY_SPEED = {WEAK: 0.5, STRONG: 1.5}
_CATEGORY_STATIC = {WEAK: 14, STRONG: 80}


@dataclass(frozen=True)
class ScenarioConfig:
    category: str = WEAK
    carrier_freq: float = 6e9  # Hz
    bandwidth: float = 150e6  # Hz; delay bin spacing is 1/bandwidth
    tx_rx_distance: float = 50.0  # m, fixed
    speed: float | None = None  # m/s; defaults from category
    n_snapshots: int = 300
    n_delay_bins: int = 300
    snapshot_dt: float = 0.1  # s
    n_static_scatterers: int | None = None  # defaults from category
    n_dynamic_scatterers: int = 2
    dynamic_scatterer_offset_range: tuple[float, float] = (5.0, 25.0)
    noise_floor: float = -150.0  # dB
    rng_seed: int = 0
    # tap power model: per-scatterer reflection loss range, log-normal jitter
    # amplitude, and the distance over which that jitter stays coherent
    reflection_loss_range: tuple[float, float] = (15.0, 25.0)
    shadow_sigma_db: float = 2.0
    # per-tap visibility fading: large log-normal swings, AR(1) over the
    # distance driven, so tap power decorrelates at a speed-scaled rate
    visibility_sigma_db: float = 6.0
    visibility_coherence_m: float = 24.0

    def resolved(self) -> "ScenarioConfig":
        """Fill category-dependent defaults and validate."""
        cfg = self
        if cfg.category not in (WEAK, STRONG):
            raise ValueError(f"unknown category {cfg.category!r}")
        if cfg.speed is None:
            cfg = replace(cfg, speed=_CATEGORY_SPEED[cfg.category])
        if cfg.n_static_scatterers is None:
            cfg = replace(cfg, n_static_scatterers=_CATEGORY_STATIC[cfg.category])
        if cfg.speed <= 0 or cfg.tx_rx_distance <= 0:
            raise ValueError("speed and tx_rx_distance must be positive")
        if cfg.n_snapshots <= 0 or cfg.n_delay_bins <= 0 or cfg.snapshot_dt <= 0:
            raise ValueError("grid sizes and snapshot_dt must be positive")
        if cfg.n_static_scatterers < 0 or cfg.n_dynamic_scatterers < 0:
            raise ValueError("scatterer counts must be non-negative")
        lo, hi = cfg.dynamic_scatterer_offset_range
        if not (0 < lo <= hi):
            raise ValueError("dynamic scatterer offsets must be positive")
        return cfg

    @property
    def delay_bin_ns(self) -> float:
        return 1e9 / self.bandwidth


def friis_linear_gain(path_length_m: float | np.ndarray, carrier_freq: float) -> np.ndarray:
    """Free-space power gain (lambda / 4 pi d)^2 under unit transmit power."""
    lam = C_MPS / carrier_freq
    return (lam / (4.0 * np.pi * np.asarray(path_length_m))) ** 2


def _los_bin(cfg: ScenarioConfig) -> int:
    los_delay_ns = cfg.tx_rx_distance / C_MPS * 1e9
    return int(round(los_delay_ns / cfg.delay_bin_ns))


def simulate_dynamic_channel(config: ScenarioConfig) -> Pdp:
    """Simulate one dynamic channel as a T x D PDP sequence in dB.

    Geometry: Tx at x=0, Rx at x=tx_rx_distance, both driving in +x at the
    configured speed. Static scatterers are fixed roadside points; dynamic
    scatterers are vehicles in other lanes co-moving with a small speed
    mismatch. Per-tap power is free-space decay over the bounce path plus a
    fixed per-scatterer reflection loss and a log-normal perturbation drawn
    once per scatterer. Taps are accumulated in linear power on the
    1/bandwidth delay grid and floored at the noise floor.
    """
    cfg = config.resolved()
    rng = np.random.default_rng(cfg.rng_seed)

    T, D = cfg.n_snapshots, cfg.n_delay_bins
    dbin = cfg.delay_bin_ns
    los_bin = _los_bin(cfg)
    if los_bin >= D:
        raise ValueError(
            f"LOS delay {cfg.tx_rx_distance / C_MPS * 1e9:.1f} ns exceeds the "
            f"delay grid span {D * dbin:.1f} ns"
        )

    time_grid = np.arange(T) * cfg.snapshot_dt
    delay_grid = np.arange(D) * dbin

    # Tx/Rx x-positions per snapshot (common lane, y = 0).
    tx_x = cfg.speed * time_grid
    rx_x = tx_x + cfg.tx_rx_distance

    # Keep bounce paths on the grid: total path length must fit D bins.
    max_path_m = (D - 1) * dbin * 1e-9 * C_MPS

    # Static scatterers: roadside points on both sides of the street.
    n_s = cfg.n_static_scatterers
    sx = rng.uniform(-20.0, cfg.tx_rx_distance + 40.0, size=n_s)
    sy = rng.uniform(6.0, 28.0, size=n_s) * rng.choice([-1.0, 1.0], size=n_s)

    # Dynamic scatterers: vehicles in a side lane, offset 5-25 m along the
    # road from the Tx/Rx pair, nominally co-moving but with a small speed
    # mismatch so their taps drift slowly.
    n_d = cfg.n_dynamic_scatterers
    lo, hi = cfg.dynamic_scatterer_offset_range
    d_off = rng.uniform(lo, hi, size=n_d) * rng.choice([-1.0, 1.0], size=n_d)
    d_y = rng.choice([-4.0, 4.0], size=n_d)
    d_speed = cfg.speed * (1.0 + rng.uniform(-0.1, 0.1, size=n_d))

    n_taps = n_s + n_d
    refl_loss = rng.uniform(*cfg.reflection_loss_range, size=n_taps)
    jitter_db = np.zeros((T, n_taps))
    if n_taps:
        # Static per-tap shadowing plus visibility fading: an AR(1)
        # log-normal process over the distance driven, so the channel's
        # tap powers decorrelate at a rate proportional to platform speed.
        jitter_db += rng.normal(0.0, cfg.shadow_sigma_db, size=n_taps)[None, :]
        rho = float(np.exp(-cfg.speed * cfg.snapshot_dt
                           / cfg.visibility_coherence_m))
        fading = np.empty((T, n_taps))
        fading[0] = rng.normal(0.0, cfg.visibility_sigma_db, size=n_taps)
        if T > 1:
            innov = rng.normal(
                0.0, cfg.visibility_sigma_db * np.sqrt(1.0 - rho**2),
                size=(T - 1, n_taps))
            for t in range(1, T):
                fading[t] = rho * fading[t - 1] + innov[t - 1]
        # Remove the log-normal mean-power inflation so average tap power
        # (and hence path loss) is independent of the fading amplitude.
        jitter_db += fading - np.log(10.0) / 20.0 * cfg.visibility_sigma_db**2

    power_lin = np.zeros((T, D))
    # LOS tap: fixed delay, free-space power at the fixed Tx-Rx distance.
    power_lin[:, los_bin] += friis_linear_gain(cfg.tx_rx_distance, cfg.carrier_freq)

    if n_taps:
        # Scatterer positions per snapshot: static points broadcast over T,
        # dynamic vehicles advance with their own speed.
        scat_x = np.empty((T, n_taps))
        scat_y = np.empty((T, n_taps))
        if n_s:
            scat_x[:, :n_s] = sx
            scat_y[:, :n_s] = sy
        if n_d:
            scat_x[:, n_s:] = (tx_x[:, None] + d_off[None, :]
                               + (d_speed - cfg.speed)[None, :] * time_grid[:, None])
            scat_y[:, n_s:] = d_y

        d1 = np.hypot(scat_x - tx_x[:, None], scat_y)  # Tx -> scatterer
        d2 = np.hypot(scat_x - rx_x[:, None], scat_y)  # scatterer -> Rx
        path = d1 + d2
        tap_gain = friis_linear_gain(path, cfg.carrier_freq) * 10.0 ** (
            (jitter_db - refl_loss[None, :]) / 10.0
        )

        # Linear-interpolation binning: each tap's power is split between
        # the two nearest delay bins, so taps slide smoothly across the
        # grid as the geometry drifts.
        delay_bins = path / C_MPS * 1e9 / dbin
        # Scatterer taps never land in the LOS guard region or off the grid.
        delay_bins = np.maximum(delay_bins, los_bin + 2.0)
        lo_bin = np.floor(delay_bins).astype(int)
        frac = delay_bins - lo_bin
        valid = (path <= max_path_m) & (lo_bin + 1 < D)
        t_idx = np.broadcast_to(np.arange(T)[:, None], lo_bin.shape)
        np.add.at(power_lin, (t_idx[valid], lo_bin[valid]),
                  (tap_gain * (1.0 - frac))[valid])
        np.add.at(power_lin, (t_idx[valid], lo_bin[valid] + 1),
                  (tap_gain * frac)[valid])

    with np.errstate(divide="ignore"):
        power_db = 10.0 * np.log10(power_lin)
    power_db = np.maximum(power_db, cfg.noise_floor)

    return Pdp(power=power_db, delay_grid=delay_grid, time_grid=time_grid,
               los_bin_index=los_bin, label=cfg.category)


def build_dataset(configs: list[ScenarioConfig], n_per_config: int,
                  master_seed: int = 0) -> ChannelDataset:
    """Run n_per_config independent simulations per config and concatenate.

    Per-channel seeds are drawn deterministically from the master seed, so
    the same (configs, n_per_config, master_seed) always yields a
    bit-identical dataset.
    """
    if not configs:
        raise ValueError("need at least one ScenarioConfig")
    if n_per_config < 1:
        raise ValueError("n_per_config must be >= 1")
    resolved = [c.resolved() for c in configs]
    grid_keys = {
        (c.n_snapshots, c.n_delay_bins, c.snapshot_dt, c.bandwidth,
         c.noise_floor, c.tx_rx_distance)
        for c in resolved
    }
    if len(grid_keys) > 1:
        raise ValueError("all configs in a dataset must share grid metadata")

    seed_seq = np.random.SeedSequence(master_seed)
    child_seeds = [int(s.generate_state(1)[0]) for s in
                   seed_seq.spawn(len(resolved) * n_per_config)]

    channels: list[Pdp] = []
    seeds: list[int] = []
    for ci, cfg in enumerate(resolved):
        for k in range(n_per_config):
            seed = child_seeds[ci * n_per_config + k]
            channels.append(simulate_dynamic_channel(replace(cfg, rng_seed=seed)))
            seeds.append(seed)

    first = channels[0]
    manifest = make_manifest(
        delay_grid_ns=first.delay_grid,
        time_grid_s=first.time_grid,
        los_bin_index=first.los_bin_index,
        noise_floor_db=resolved[0].noise_floor,
        labels=[ch.label for ch in channels],
        seeds=seeds,
    )
    manifest["master_seed"] = int(master_seed)
    return ChannelDataset(channels=channels, manifest=manifest)
