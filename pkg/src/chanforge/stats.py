"""Channel statistics: temporal PDP correlation, WSS intervals, RMS delay
spread, multipath count, path loss, shadow fading, and Frechet distance
between sample distributions.

All correlation math runs on linear power; PDPs stored in dB are converted
on entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from chanforge.datasets import ChannelDataset, Pdp

DEFAULT_WSS_THRESHOLD = 0.7
LOS_GUARD_BINS = 1  # LOS exclusion zeroes the LOS bin +/- this many bins

FEATURE_NAMES = ("wss_interval", "rmsds", "multipath_count", "shadow_fading",
                 "path_loss")


class UndefinedStatisticError(ValueError):
    """Raised when a statistic is undefined on the given input."""


def db_to_linear(P_db: np.ndarray) -> np.ndarray:
    return 10.0 ** (np.asarray(P_db, dtype=np.float64) / 10.0)


def tpcc(p_i: np.ndarray, p_j: np.ndarray) -> float:
    """Temporal PDP correlation coefficient between two linear-power PDPs.

    Discrete evaluation of sum(p_i * p_j) / max(sum(p_i^2), sum(p_j^2)) on a
    shared uniform delay grid (the grid spacing cancels). Result is in [0, 1].
    """
    p_i = np.asarray(p_i, dtype=np.float64)
    p_j = np.asarray(p_j, dtype=np.float64)
    if p_i.shape != p_j.shape:
        raise ValueError("PDP vectors must have equal length")
    if np.any(p_i < 0) or np.any(p_j < 0):
        raise ValueError("linear powers must be non-negative")
    den = max(float(p_i @ p_i), float(p_j @ p_j))
    if den == 0.0:
        raise UndefinedStatisticError("TPCC undefined for all-zero PDPs")
    return float(p_i @ p_j) / den


def _linear_snapshots(channel: Pdp, exclude_los: bool,
                      noise_floor: float | None) -> np.ndarray:
    P = db_to_linear(channel.power)
    if noise_floor is not None:
        # Floor cells carry 10^(floor/10) of residual power; zero them so
        # the correlation only sees actual taps.
        P = np.where(channel.power <= noise_floor, 0.0, P)
    if exclude_los:
        lo = max(channel.los_bin_index - LOS_GUARD_BINS, 0)
        hi = min(channel.los_bin_index + LOS_GUARD_BINS + 1, P.shape[1])
        P = P.copy()
        P[:, lo:hi] = 0.0
    return P


def tpcc_matrix(channel: Pdp, exclude_los: bool = True,
                noise_floor: float | None = None) -> np.ndarray:
    """T x T TPCC matrix of a channel (symmetric, unit diagonal)."""
    P = _linear_snapshots(channel, exclude_los, noise_floor)
    gram = P @ P.T
    d = np.diag(gram).copy()
    if np.any(d == 0.0):
        raise UndefinedStatisticError(
            "TPCC undefined: a snapshot has no power outside the excluded region")
    den = np.maximum(d[:, None], d[None, :])
    return gram / den


def wss_intervals(channel: Pdp, threshold: float = DEFAULT_WSS_THRESHOLD,
                  snapshot_dt: float | None = None,
                  exclude_los: bool = True) -> np.ndarray:
    """Per-reference-snapshot stationarity interval lengths, in seconds.

    From each reference snapshot i, the interval runs forward to the first
    snapshot j > i whose TPCC with i drops below the threshold; if none does,
    the interval runs to the end of the observation window.
    """
    if snapshot_dt is None:
        tg = channel.time_grid
        snapshot_dt = float(tg[1] - tg[0]) if len(tg) > 1 else 1.0
    c = tpcc_matrix(channel, exclude_los=exclude_los)
    T = c.shape[0]
    intervals = np.empty(T)
    for i in range(T):
        below = np.nonzero(c[i, i + 1:] < threshold)[0]
        j_star = (i + 1 + below[0]) if below.size else T
        intervals[i] = (j_star - i) * snapshot_dt
    return intervals


def wss_interval_mean(channel: Pdp, threshold: float = DEFAULT_WSS_THRESHOLD,
                      snapshot_dt: float | None = None) -> float:
    return float(np.mean(wss_intervals(channel, threshold, snapshot_dt)))


def rmsds(pdp_snapshot: np.ndarray, delay_grid: np.ndarray,
          noise_floor: float = -150.0) -> float:
    """RMS delay spread of one linear-power snapshot, in the grid's units.

    Bins at or below the noise floor (dB) are excluded from the moments.
    """
    p = np.asarray(pdp_snapshot, dtype=np.float64)
    tau = np.asarray(delay_grid, dtype=np.float64)
    if p.shape != tau.shape:
        raise ValueError("delay grid must match the snapshot length")
    with np.errstate(divide="ignore"):
        keep = 10.0 * np.log10(np.where(p > 0, p, np.nan)) > noise_floor
    keep = np.nan_to_num(keep, nan=0.0).astype(bool)
    if not keep.any():
        raise UndefinedStatisticError("all bins below the noise floor")
    p, tau = p[keep], tau[keep]
    total = p.sum()
    mean_tau = (p * tau).sum() / total
    second = (p * tau**2).sum() / total
    return float(np.sqrt(max(second - mean_tau**2, 0.0)))


def multipath_count(pdp_snapshot_db: np.ndarray, noise_floor: float = -150.0) -> int:
    """Number of delay bins strictly above the noise floor (inputs in dB)."""
    return int(np.sum(np.asarray(pdp_snapshot_db) > noise_floor))


def path_loss(pdp_snapshot_lin: np.ndarray) -> float:
    """-10 log10 of total received linear power under unit transmit power."""
    total = float(np.sum(pdp_snapshot_lin))
    if total <= 0:
        raise UndefinedStatisticError("zero total power")
    return -10.0 * np.log10(total)


def shadow_fading(per_channel_path_loss: np.ndarray) -> np.ndarray:
    """Per-channel deviation of mean path loss from the group mean, in dB."""
    pl = np.asarray(per_channel_path_loss, dtype=np.float64)
    return pl - pl.mean()


def _sym_sqrtm(A: np.ndarray) -> np.ndarray:
    """Square root of a symmetric PSD matrix, clamping tiny negative eigs."""
    w, V = np.linalg.eigh((A + A.T) / 2.0)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T


def fid(samples_x: np.ndarray, samples_g: np.ndarray) -> float:
    """Frechet distance between two Gaussian fits of sample sets.

    ||mu_x - mu_g||^2 + Tr(S_x + S_g - 2 (S_x S_g)^{1/2}) with sample means
    and covariances; 1-D inputs reduce to (mu_x-mu_g)^2 + (sd_x-sd_g)^2.
    The matrix square root is taken as sqrtm(S_x^{1/2} S_g S_x^{1/2}).
    """
    X = np.atleast_2d(np.asarray(samples_x, dtype=np.float64))
    G = np.atleast_2d(np.asarray(samples_g, dtype=np.float64))
    if X.shape[0] == 1:
        X = X.T
    if G.shape[0] == 1:
        G = G.T
    if X.shape[1] != G.shape[1]:
        raise ValueError("feature dimensionality mismatch")
    if X.shape[0] < 2 or G.shape[0] < 2:
        raise ValueError("need at least 2 samples per side")
    mu_x, mu_g = X.mean(axis=0), G.mean(axis=0)
    S_x = np.cov(X, rowvar=False, ddof=1).reshape(X.shape[1], X.shape[1])
    S_g = np.cov(G, rowvar=False, ddof=1).reshape(G.shape[1], G.shape[1])
    if not (np.all(np.isfinite(S_x)) and np.all(np.isfinite(S_g))):
        raise ValueError("non-finite covariance")
    rx = _sym_sqrtm(S_x)
    cross = _sym_sqrtm(rx @ S_g @ rx)
    value = float(np.sum((mu_x - mu_g) ** 2)
                  + np.trace(S_x) + np.trace(S_g) - 2.0 * np.trace(cross))
    # The distance is non-negative by construction; trace cancellation can
    # leave a tiny negative residue.
    return max(value, 0.0)


@dataclass
class StatsSummary:
    """Per-category channel statistics plus per-channel samples for FID."""

    means: dict[str, dict[str, float]]  # category -> feature -> mean
    counts: dict[str, int]
    samples: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "means": self.means,
            "counts": self.counts,
            "samples": {
                cat: {k: v.tolist() for k, v in feats.items()}
                for cat, feats in self.samples.items()
            },
        }


def channel_features(channel: Pdp, noise_floor: float,
                     wss_threshold: float = DEFAULT_WSS_THRESHOLD) -> dict[str, float]:
    """Per-channel scalar features (shadow fading is added at group level)."""
    rms = []
    for t in range(channel.n_snapshots):
        try:
            rms.append(rmsds(db_to_linear(channel.power[t]),
                             channel.delay_grid, noise_floor))
        except UndefinedStatisticError:
            continue  # snapshot with no taps above the floor
    if not rms:
        raise UndefinedStatisticError("no snapshot has bins above the noise floor")
    mpc = [multipath_count(channel.power[t], noise_floor)
           for t in range(channel.n_snapshots)]
    pl = [path_loss(db_to_linear(channel.power[t]))
          for t in range(channel.n_snapshots)]
    return {
        "wss_interval": wss_interval_mean(channel, threshold=wss_threshold),
        "rmsds": float(np.mean(rms)),
        "multipath_count": float(np.mean(mpc)),
        "path_loss": float(np.mean(pl)),
    }


def stats_summary(dataset: ChannelDataset,
                  wss_threshold: float = DEFAULT_WSS_THRESHOLD) -> StatsSummary:
    """Per-category means of the five statistics, retaining per-channel samples."""
    if not dataset.channels:
        raise ValueError("empty dataset")
    if dataset.manifest.get("space", "db") != "db":
        raise ValueError("stats run on dB datasets; denormalize first")
    noise_floor = float(dataset.manifest.get("noise_floor_db", -150.0))

    categories = sorted(set(dataset.labels))
    means: dict[str, dict[str, float]] = {}
    counts: dict[str, int] = {}
    samples: dict[str, dict[str, np.ndarray]] = {}
    for cat in categories:
        group = dataset.by_label(cat)
        if not group:
            raise ValueError(f"empty category {cat!r}")
        feats = [channel_features(ch, noise_floor, wss_threshold) for ch in group]
        pl = np.array([f["path_loss"] for f in feats])
        sf = shadow_fading(pl)
        cat_samples = {
            "wss_interval": np.array([f["wss_interval"] for f in feats]),
            "rmsds": np.array([f["rmsds"] for f in feats]),
            "multipath_count": np.array([f["multipath_count"] for f in feats]),
            "shadow_fading": sf,
            "path_loss": pl,
        }
        samples[cat] = cat_samples
        counts[cat] = len(group)
        means[cat] = {k: float(v.mean()) for k, v in cat_samples.items()}
    return StatsSummary(means=means, counts=counts, samples=samples)
