"""Training losses: adversarial cross-entropy for both networks, the
linear-power reconstruction loss, the temporal-correlation (TPCC)
supervision loss, and their weighted composition.

Everything here is a pure torch function so gradients flow back through the
generator, including through denormalization and the dB-to-linear map.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

EPS = 1e-7  # probability clamp; keeps log finite at 0/1


@dataclass(frozen=True)
class LossWeights:
    adv: float = 1.0  # lambda_1
    linear: float = 1000.0  # lambda_2
    tpcc: float = 60.0  # lambda_3

    def __post_init__(self):
        if min(self.adv, self.linear, self.tpcc) < 0:
            raise ValueError("loss weights must be non-negative")
        if max(self.adv, self.linear, self.tpcc) == 0:
            raise ValueError("at least one loss weight must be positive")


def _clamp_prob(p: torch.Tensor) -> torch.Tensor:
    return p.clamp(EPS, 1.0 - EPS)


def loss_discriminator(d_real: torch.Tensor, d_fake: torch.Tensor) -> torch.Tensor:
    """-1/2 (E[log D(real)] + E[log(1 - D(fake))])."""
    d_real = _clamp_prob(d_real)
    d_fake = _clamp_prob(d_fake)
    return -0.5 * (torch.log(d_real).mean() + torch.log(1.0 - d_fake).mean())


def loss_generator_adv(d_fake: torch.Tensor) -> torch.Tensor:
    """Non-saturating generator objective -E[log D(fake)]."""
    return -torch.log(_clamp_prob(d_fake)).mean()


def loss_discriminator_logits(real_logits: torch.Tensor,
                              fake_logits: torch.Tensor) -> torch.Tensor:
    """Same value as loss_discriminator(sigmoid(l_r), sigmoid(l_f)), but
    computed from logits so gradients survive sigmoid saturation."""
    return -0.5 * (F.logsigmoid(real_logits).mean()
                   + F.logsigmoid(-fake_logits).mean())


def loss_generator_adv_logits(fake_logits: torch.Tensor) -> torch.Tensor:
    """Logit-domain form of loss_generator_adv."""
    return -F.logsigmoid(fake_logits).mean()


def loss_linear(P: torch.Tensor, P_hat: torch.Tensor) -> torch.Tensor:
    """Sum of squared linear-power errors, scaled by the reference range.

    P and P_hat are linear-power grids of equal shape; batched inputs
    (B, T, D) are averaged over the batch. The normalizer max(P) - min(P)
    comes from the reference channel alone, so scaling both inputs by a
    common factor leaves the loss unchanged.
    """
    if P.shape != P_hat.shape:
        raise ValueError("shape mismatch")
    rng = P.max() - P.min()
    if rng <= 0:
        raise ValueError("degenerate reference range (max == min)")
    sq = ((P - P_hat) / rng) ** 2
    if sq.dim() <= 2:
        return sq.sum()
    return sq.sum(dim=tuple(range(1, sq.dim()))).mean()


def tpcc_matrix_torch(P_lin: torch.Tensor, los_bin_index: int | None = None,
                      los_guard: int = 1) -> torch.Tensor:
    """Differentiable T x T TPCC matrix of one linear-power channel (T, D)."""
    if los_bin_index is not None:
        mask = torch.ones(P_lin.shape[-1], dtype=P_lin.dtype, device=P_lin.device)
        lo = max(los_bin_index - los_guard, 0)
        hi = min(los_bin_index + los_guard + 1, P_lin.shape[-1])
        mask[lo:hi] = 0.0
        P_lin = P_lin * mask
    gram = P_lin @ P_lin.T
    d = gram.diagonal()
    den = torch.maximum(d.unsqueeze(0), d.unsqueeze(1))
    if (den == 0).any():
        raise ValueError("TPCC undefined: snapshot with no power")
    return gram / den


def loss_tpcc(P: torch.Tensor, P_hat: torch.Tensor,
              los_bin_index: int | None = None,
              per_pair: bool = False) -> torch.Tensor:
    """Mean absolute TPCC discrepancy over all snapshot pairs i < j.

    Both arguments are linear-power channels of shape (T, D). The sum is
    divided by the number of snapshots T (as printed in the source formula);
    per_pair=True switches to dividing by the number of pairs instead.
    """
    if P.shape != P_hat.shape:
        raise ValueError("shape mismatch")
    T = P.shape[0]
    c = tpcc_matrix_torch(P, los_bin_index)
    c_hat = tpcc_matrix_torch(P_hat, los_bin_index)
    iu = torch.triu_indices(T, T, offset=1)
    diff = (c - c_hat)[iu[0], iu[1]].abs().sum()
    denom = (T * (T - 1) / 2) if per_pair else T
    return diff / denom


def loss_total(l_adv: torch.Tensor, l_linear: torch.Tensor,
               l_tpcc: torch.Tensor, weights: LossWeights) -> torch.Tensor:
    """Composite generator loss lambda_1 L_adv + lambda_2 L_lin + lambda_3 L_tpcc."""
    return weights.adv * l_adv + weights.linear * l_linear + weights.tpcc * l_tpcc


def denormalize_torch(P_norm: torch.Tensor, p_min: float, p_max: float) -> torch.Tensor:
    """Differentiable inverse of the [-1, 1] normalization, in dB."""
    return (P_norm + 1.0) / 2.0 * (p_max - p_min) + p_min


def db_to_linear_torch(P_db: torch.Tensor) -> torch.Tensor:
    return torch.pow(10.0, P_db / 10.0)
