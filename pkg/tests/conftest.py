"""Shared fixtures: tiny simulated datasets kept small enough for fast tests."""

import numpy as np
import pytest

from chanforge.datasets import ChannelDataset, Pdp, make_manifest
from chanforge.preprocess import preprocess_dataset
from chanforge.simkit import ScenarioConfig, build_dataset


def make_pdp(power_db, dt=0.1, delay_bin_ns=1.0, los_bin_index=0, label="weak"):
    """Wrap a raw dB matrix in a Pdp with uniform grids."""
    power = np.asarray(power_db, dtype=np.float64)
    T, D = power.shape
    return Pdp(
        power=power,
        delay_grid=np.arange(D, dtype=np.float64) * delay_bin_ns,
        time_grid=np.arange(T, dtype=np.float64) * dt,
        los_bin_index=los_bin_index,
        label=label,
    )


def make_dataset(channels, noise_floor_db=-150.0):
    ch0 = channels[0]
    manifest = make_manifest(
        delay_grid_ns=ch0.delay_grid,
        time_grid_s=ch0.time_grid,
        los_bin_index=ch0.los_bin_index,
        noise_floor_db=noise_floor_db,
        labels=[ch.label for ch in channels],
        seeds=list(range(len(channels))),
    )
    return ChannelDataset(channels=channels, manifest=manifest)


@pytest.fixture(scope="session")
def tiny_configs():
    return [
        ScenarioConfig(category="weak", n_snapshots=12, n_delay_bins=48),
        ScenarioConfig(category="strong", n_snapshots=12, n_delay_bins=48),
    ]


@pytest.fixture(scope="session")
def tiny_dataset(tiny_configs):
    return build_dataset(tiny_configs, n_per_config=4, master_seed=123)


@pytest.fixture(scope="session")
def tiny_preprocessed(tiny_dataset):
    return preprocess_dataset(tiny_dataset)
