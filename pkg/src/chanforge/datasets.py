"""Core data containers and the on-disk dataset format.

A dataset on disk is two files in a directory:
  * ``data.f32`` -- raw little-endian float32 tensor, shape [N, T, D], row-major
  * ``manifest.json`` -- grids, labels, seeds, noise floor and (after
    preprocessing) the normalization bounds and masking threshold
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

MANIFEST_VERSION = 1

TENSOR_FILE = "data.f32"
MANIFEST_FILE = "manifest.json"


@dataclass
class Pdp:
    """One dynamic channel: received power over (snapshot, delay bin).

    ``power`` is T x D. Values are dB for raw channels; after preprocessing
    the same container carries normalized values in [-1, 1] (the manifest's
    ``space`` field says which).
    """

    power: np.ndarray
    delay_grid: np.ndarray  # ns, length D
    time_grid: np.ndarray  # s, length T
    los_bin_index: int
    label: str  # "weak" | "strong"

    @property
    def n_snapshots(self) -> int:
        return self.power.shape[0]

    @property
    def n_delay_bins(self) -> int:
        return self.power.shape[1]


@dataclass
class ChannelDataset:
    """A labeled collection of dynamic channels sharing one grid."""

    channels: list[Pdp]
    manifest: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.channels)

    @property
    def labels(self) -> list[str]:
        return [ch.label for ch in self.channels]

    def tensor(self) -> np.ndarray:
        """Stack all channels into one [N, T, D] float32 tensor."""
        return np.stack([ch.power for ch in self.channels]).astype(np.float32)

    def by_label(self, label: str) -> list[Pdp]:
        return [ch for ch in self.channels if ch.label == label]


def make_manifest(
    *,
    delay_grid_ns: np.ndarray,
    time_grid_s: np.ndarray,
    los_bin_index: int,
    noise_floor_db: float,
    labels: list[str],
    seeds: list[int],
    space: str = "db",
    bounds: tuple[float, float] | None = None,
    threshold_db: float | None = None,
) -> dict:
    m = {
        "version": MANIFEST_VERSION,
        "space": space,  # "db" or "normalized"
        "delay_grid_ns": [float(v) for v in delay_grid_ns],
        "time_grid_s": [float(v) for v in time_grid_s],
        "los_bin_index": int(los_bin_index),
        "noise_floor_db": float(noise_floor_db),
        "labels": list(labels),
        "seeds": [int(s) for s in seeds],
    }
    if bounds is not None:
        m["bounds"] = {"p_min": float(bounds[0]), "p_max": float(bounds[1])}
    if threshold_db is not None:
        m["threshold_db"] = float(threshold_db)
    return m


def dataset_from_tensor(tensor: np.ndarray, manifest: dict) -> ChannelDataset:
    delay_grid = np.asarray(manifest["delay_grid_ns"], dtype=np.float64)
    time_grid = np.asarray(manifest["time_grid_s"], dtype=np.float64)
    los = int(manifest["los_bin_index"])
    labels = manifest["labels"]
    if tensor.shape[0] != len(labels):
        raise ValueError(
            f"tensor has {tensor.shape[0]} channels but manifest lists {len(labels)} labels"
        )
    channels = [
        Pdp(power=tensor[i], delay_grid=delay_grid, time_grid=time_grid,
            los_bin_index=los, label=labels[i])
        for i in range(tensor.shape[0])
    ]
    return ChannelDataset(channels=channels, manifest=manifest)


def save_dataset(dataset: ChannelDataset, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    tensor = dataset.tensor()
    tensor.astype("<f4").tofile(os.path.join(out_dir, TENSOR_FILE))
    manifest = dict(dataset.manifest)
    manifest["shape"] = list(tensor.shape)
    with open(os.path.join(out_dir, MANIFEST_FILE), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)


def load_dataset(in_dir: str) -> ChannelDataset:
    with open(os.path.join(in_dir, MANIFEST_FILE)) as f:
        manifest = json.load(f)
    shape = tuple(manifest["shape"])
    tensor = np.fromfile(os.path.join(in_dir, TENSOR_FILE), dtype="<f4").reshape(shape)
    return dataset_from_tensor(tensor, manifest)
