"""Masking and normalization of PDP datasets, plus the exact inverse.

Pipeline: threshold-mask the dB data, min/max normalize to [-1, 1] with
bounds computed once per dataset, then pin masked cells to -1. The mask is
persisted separately because a cell at the global minimum also normalizes
to -1 and would otherwise be indistinguishable from a masked cell.
"""

from __future__ import annotations

import numpy as np

from chanforge.datasets import ChannelDataset, Pdp

DEFAULT_THRESHOLD_DB = -150.0


class DegenerateInputError(ValueError):
    """Raised when normalization bounds collapse (constant input)."""


def mask(P: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Threshold-mask a dB matrix.

    Returns (P', mask) where mask is 1 where P >= threshold and 0 elsewhere,
    and P' equals P on kept cells and the threshold on masked cells.
    """
    P = np.asarray(P, dtype=np.float64)
    if not np.all(np.isfinite(P)):
        raise ValueError("mask requires finite input")
    m = (P >= threshold).astype(np.float64)
    return np.where(m == 1.0, P, threshold), m


def normalize(P: np.ndarray, bounds: tuple[float, float] | None = None
              ) -> tuple[np.ndarray, tuple[float, float]]:
    """Min/max normalize to [-1, 1]; returns (P_norm, (p_min, p_max)).

    Pass precomputed bounds to normalize several matrices on one shared
    scale (the dataset-global convention).
    """
    P = np.asarray(P, dtype=np.float64)
    if bounds is None:
        p_min, p_max = float(P.min()), float(P.max())
    else:
        p_min, p_max = float(bounds[0]), float(bounds[1])
    if not p_max > p_min:
        raise DegenerateInputError(f"P_max ({p_max}) must exceed P_min ({p_min})")
    return 2.0 * (P - p_min) / (p_max - p_min) - 1.0, (p_min, p_max)


def apply_mask(P_norm: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Pin masked (mask=0) cells of a normalized matrix to -1."""
    P_norm = np.asarray(P_norm)
    m = np.asarray(m)
    if P_norm.shape != m.shape:
        raise ValueError(f"shape mismatch: {P_norm.shape} vs {m.shape}")
    return np.where(m == 0, -1.0, P_norm)


def denormalize(P_norm: np.ndarray, bounds: tuple[float, float]) -> np.ndarray:
    """Exact inverse of normalize for the given bounds."""
    p_min, p_max = float(bounds[0]), float(bounds[1])
    if not p_max > p_min:
        raise DegenerateInputError(f"P_max ({p_max}) must exceed P_min ({p_min})")
    return (np.asarray(P_norm, dtype=np.float64) + 1.0) / 2.0 * (p_max - p_min) + p_min


def preprocess_dataset(dataset: ChannelDataset,
                       threshold: float = DEFAULT_THRESHOLD_DB) -> ChannelDataset:
    """Mask and normalize every channel of a dB dataset with global bounds.

    The returned dataset carries normalized values in [-1, 1]; its manifest
    records the bounds and threshold needed to invert the transform.
    """
    if dataset.manifest.get("space", "db") != "db":
        raise ValueError("dataset is already preprocessed")
    masked = []
    masks = []
    for ch in dataset.channels:
        Pm, m = mask(ch.power, threshold)
        masked.append(Pm)
        masks.append(m)
    p_min = min(float(P.min()) for P in masked)
    p_max = max(float(P.max()) for P in masked)
    if not p_max > p_min:
        raise DegenerateInputError("dataset power range is degenerate")

    channels = []
    for ch, Pm, m in zip(dataset.channels, masked, masks):
        P_norm, _ = normalize(Pm, bounds=(p_min, p_max))
        channels.append(Pdp(power=apply_mask(P_norm, m),
                            delay_grid=ch.delay_grid, time_grid=ch.time_grid,
                            los_bin_index=ch.los_bin_index, label=ch.label))

    manifest = dict(dataset.manifest)
    manifest["space"] = "normalized"
    manifest["bounds"] = {"p_min": p_min, "p_max": p_max}
    manifest["threshold_db"] = float(threshold)
    return ChannelDataset(channels=channels, manifest=manifest)
