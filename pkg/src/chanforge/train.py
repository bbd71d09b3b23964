"""Alternating adversarial training, checkpointing, and conditioned generation."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from chanforge import losses as L
from chanforge.datasets import ChannelDataset, Pdp, dataset_from_tensor
from chanforge.model import LATENT_DIM, Discriminator, Generator

CHECKPOINT_VERSION = 1

LABEL_TO_INDEX = {"weak": 0, "strong": 1}
INDEX_TO_LABEL = {v: k for k, v in LABEL_TO_INDEX.items()}

# Cells this far below the weakest plausible tap are treated as background
# and snapped back to the noise floor when producing dB channels. The real
# taps sit tens of dB above the floor, so the midpoint of that gap cleanly
# separates taps from the generator's background.
FLOOR_MARGIN_DB = 36.0

LOG_FIELDS = ("step", "epoch", "loss_d", "loss_g_adv", "loss_linear",
              "loss_tpcc", "loss_total")


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 4e-4
    beta1: float = 0.8
    beta2: float = 0.999
    batch_size: int = 32
    epochs: int = 150
    lambda_adv: float = 1.0
    lambda_linear: float = 1000.0
    lambda_tpcc: float = 60.0
    recurrence: str = "lstm"  # "lstm" or "gru"
    stationarity_constraint: bool = True
    tpcc_per_pair: bool = False
    latent_dim: int = LATENT_DIM
    seed: int = 0
    checkpoint_every: int = 50  # epochs
    device: str = "cpu"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must be in (0, 1)")
        if self.recurrence not in ("lstm", "gru"):
            raise ValueError(f"unknown recurrence {self.recurrence!r}")

    def weights(self) -> L.LossWeights:
        lam3 = self.lambda_tpcc if self.stationarity_constraint else 0.0
        return L.LossWeights(self.lambda_adv, self.lambda_linear, lam3)


@dataclass
class TrainHistory:
    rows: list[dict] = field(default_factory=list)

    def append(self, **kw):
        self.rows.append(kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=LOG_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: row[k] for k in LOG_FIELDS})
        return buf.getvalue()

    def save(self, path: str):
        with open(path, "w") as f:
            f.write(self.to_csv())


def _require_preprocessed(dataset: ChannelDataset) -> tuple[float, float, float]:
    m = dataset.manifest
    if m.get("space") != "normalized" or "bounds" not in m:
        raise ValueError("train() needs a preprocessed dataset (normalized, "
                         "with bounds in the manifest)")
    return m["bounds"]["p_min"], m["bounds"]["p_max"], m["threshold_db"]


def train(dataset: ChannelDataset, config: TrainConfig,
          out_dir: str | None = None) -> tuple[dict, TrainHistory]:
    """Adversarial training: one discriminator step then one generator step
    per batch. Returns the final checkpoint and the per-step loss history.
    """
    p_min, p_max, _ = _require_preprocessed(dataset)
    labels = sorted(set(dataset.labels))
    unknown = [lb for lb in labels if lb not in LABEL_TO_INDEX]
    if unknown:
        raise ValueError(f"unknown labels {unknown}")

    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    device = torch.device(config.device)

    data = torch.from_numpy(dataset.tensor()).to(device)  # (N, T, D) in [-1, 1]
    y_all = torch.tensor([LABEL_TO_INDEX[lb] for lb in dataset.labels],
                         device=device)
    real_db = L.denormalize_torch(data, p_min, p_max)
    real_lin = L.db_to_linear_torch(real_db)
    N, T, D = data.shape
    los_bin = int(dataset.manifest["los_bin_index"])

    gen = Generator(T, D, latent_dim=config.latent_dim,
                    recurrence=config.recurrence).to(device)
    disc = Discriminator(T, D).to(device)
    opt_g = torch.optim.Adam(gen.parameters(), lr=config.learning_rate,
                             betas=(config.beta1, config.beta2))
    opt_d = torch.optim.Adam(disc.parameters(), lr=config.learning_rate,
                             betas=(config.beta1, config.beta2))
    weights = config.weights()

    history = TrainHistory()
    step = 0
    for epoch in range(config.epochs):
        order = rng.permutation(N)
        for start in range(0, N, config.batch_size):
            idx = order[start:start + config.batch_size]
            idx_t = torch.from_numpy(idx).to(device)
            real = data[idx_t]
            y = y_all[idx_t]
            B = real.shape[0]

            z = torch.randn(B, config.latent_dim, device=device)
            fake = gen(z, y)

            # Discriminator step on the adversarial cross-entropy
            # (logit-domain form: same value, saturation-proof gradients).
            real_logits = disc.logits(real, y)
            fake_logits = disc.logits(fake.detach(), y)
            l_d = L.loss_discriminator_logits(real_logits, fake_logits)
            opt_d.zero_grad()
            l_d.backward()
            opt_d.step()

            # Generator step on the composite objective.
            fake_logits_g = disc.logits(fake, y)
            l_adv = L.loss_generator_adv_logits(fake_logits_g)
            fake_lin = L.db_to_linear_torch(
                L.denormalize_torch(fake, p_min, p_max))
            batch_real_lin = real_lin[idx_t]
            l_lin = L.loss_linear(batch_real_lin, fake_lin)
            if weights.tpcc > 0:
                l_tp = torch.stack([
                    L.loss_tpcc(batch_real_lin[b], fake_lin[b],
                                los_bin_index=los_bin,
                                per_pair=config.tpcc_per_pair)
                    for b in range(B)
                ]).mean()
            else:
                l_tp = torch.zeros((), device=device)
            l_total = L.loss_total(l_adv, l_lin, l_tp, weights)
            opt_g.zero_grad()
            l_total.backward()
            opt_g.step()

            vals = {
                "loss_d": l_d.detach().item(),
                "loss_g_adv": l_adv.detach().item(),
                "loss_linear": l_lin.detach().item(),
                "loss_tpcc": l_tp.detach().item(),
                "loss_total": l_total.detach().item(),
            }
            if not all(np.isfinite(v) for v in vals.values()):
                raise TrainingDivergedError(
                    f"non-finite loss at step {step}: {vals}")
            history.append(step=step, epoch=epoch, **vals)
            step += 1

        if out_dir and config.checkpoint_every > 0 and \
                (epoch + 1) % config.checkpoint_every == 0:
            ckpt = build_checkpoint(gen, disc, config, dataset.manifest)
            save_checkpoint(ckpt, os.path.join(out_dir, f"ckpt_ep{epoch + 1:04d}.pt"))

    checkpoint = build_checkpoint(gen, disc, config, dataset.manifest)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        save_checkpoint(checkpoint, os.path.join(out_dir, "ckpt_final.pt"))
        history.save(os.path.join(out_dir, "train_log.csv"))
    return checkpoint, history


def build_checkpoint(gen: Generator, disc: Discriminator, config: TrainConfig,
                     manifest: dict) -> dict:
    return {
        "version": CHECKPOINT_VERSION,
        "generator": gen.state_dict(),
        "discriminator": disc.state_dict(),
        "config": asdict(config),
        "manifest": dict(manifest),
        "grid": {"n_snapshots": len(manifest["time_grid_s"]),
                 "n_delay_bins": len(manifest["delay_grid_ns"])},
    }


def save_checkpoint(checkpoint: dict, path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    torch.save(checkpoint, path)


def load_checkpoint(path: str) -> dict:
    ckpt = torch.load(path, map_location="cpu", weights_only=False)
    if ckpt.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {ckpt.get('version')}")
    return ckpt


def restore_generator(checkpoint: dict) -> Generator:
    cfg = checkpoint["config"]
    grid = checkpoint["grid"]
    gen = Generator(grid["n_snapshots"], grid["n_delay_bins"],
                    latent_dim=cfg["latent_dim"], recurrence=cfg["recurrence"])
    gen.load_state_dict(checkpoint["generator"])
    gen.eval()
    return gen


def generate(checkpoint: dict, label: str, n: int, seed: int = 0,
             floor_margin_db: float = FLOOR_MARGIN_DB) -> ChannelDataset:
    """Sample n channels for one label from a trained checkpoint.

    Outputs are denormalized to dB with the checkpointed bounds; cells within
    floor_margin_db of the masking threshold are snapped to the noise floor
    (the generated counterpart of the masking step).
    """
    if label not in LABEL_TO_INDEX:
        raise ValueError(f"unknown label {label!r}")
    manifest = checkpoint["manifest"]
    p_min = manifest["bounds"]["p_min"]
    p_max = manifest["bounds"]["p_max"]
    threshold = manifest["threshold_db"]
    noise_floor = manifest["noise_floor_db"]

    gen = restore_generator(checkpoint)
    torch.manual_seed(seed)
    T = checkpoint["grid"]["n_snapshots"]
    D = checkpoint["grid"]["n_delay_bins"]
    cfg = checkpoint["config"]

    out = np.empty((n, T, D), dtype=np.float32)
    with torch.no_grad():
        y = torch.full((1,), LABEL_TO_INDEX[label], dtype=torch.long)
        for k in range(n):
            z = torch.randn(1, cfg["latent_dim"])
            sample = gen(z, y)[0].numpy()
            db = (sample + 1.0) / 2.0 * (p_max - p_min) + p_min
            db = np.where(db < threshold + floor_margin_db, noise_floor, db)
            out[k] = db

    new_manifest = dict(manifest)
    new_manifest["space"] = "db"
    new_manifest["labels"] = [label] * n
    new_manifest["seeds"] = [int(seed)] * n
    new_manifest["generated"] = {"seed": int(seed), "label": label, "n": int(n)}
    return dataset_from_tensor(out, new_manifest)
