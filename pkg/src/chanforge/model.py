"""Conditional recurrent generator and discriminator.

The generator embeds the class label, gates the latent vector by elementwise
multiplication, expands through fully connected layers (2048, 1000, T*D),
reshapes to a T x D sequence, runs it through two stacked recurrent cells
(LSTM by default, GRU for the ablation), and projects each step back to D
delay bins with a tanh output in (-1, 1).

The recurrent cells are written out gate by gate so the same step functions
can be checked against hand evaluations and finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn

LATENT_DIM = 100
N_CLASSES = 2
LEAKY_SLOPE = 0.2
DROPOUT = 0.4
# Table-style batchnorm momentum 0.8 refers to the running-average decay;
# torch's momentum argument is (1 - decay).
BN_MOMENTUM = 0.2


@dataclass
class LstmCellParams:
    """Gate weights over the concatenated [h_prev, x] vector."""

    w_f: torch.Tensor
    w_i: torch.Tensor
    w_c: torch.Tensor
    w_o: torch.Tensor
    b_f: torch.Tensor
    b_i: torch.Tensor
    b_c: torch.Tensor
    b_o: torch.Tensor

    @property
    def hidden_size(self) -> int:
        return self.w_f.shape[0]


@dataclass
class GruCellParams:
    w_r: torch.Tensor
    w_z: torch.Tensor
    w_h: torch.Tensor
    b_r: torch.Tensor
    b_z: torch.Tensor
    b_h: torch.Tensor

    @property
    def hidden_size(self) -> int:
        return self.w_r.shape[0]


def lstm_cell_step(x_t: torch.Tensor, h_prev: torch.Tensor, c_prev: torch.Tensor,
                   params: LstmCellParams) -> tuple[torch.Tensor, torch.Tensor]:
    """One LSTM step: forget/input/candidate/output gates, new (h, c)."""
    if h_prev.shape[-1] != params.hidden_size:
        raise ValueError("hidden state size does not match params")
    hx = torch.cat([h_prev, x_t], dim=-1)
    if hx.shape[-1] != params.w_f.shape[1]:
        raise ValueError("input size does not match params")
    f_t = torch.sigmoid(hx @ params.w_f.T + params.b_f)
    i_t = torch.sigmoid(hx @ params.w_i.T + params.b_i)
    c_tilde = torch.tanh(hx @ params.w_c.T + params.b_c)
    c_t = f_t * c_prev + i_t * c_tilde
    o_t = torch.sigmoid(hx @ params.w_o.T + params.b_o)
    h_t = o_t * torch.tanh(c_t)
    return h_t, c_t


def gru_cell_step(x_t: torch.Tensor, h_prev: torch.Tensor,
                  params: GruCellParams) -> torch.Tensor:
    """One GRU step: reset/update gates, candidate state, new h."""
    if h_prev.shape[-1] != params.hidden_size:
        raise ValueError("hidden state size does not match params")
    hx = torch.cat([h_prev, x_t], dim=-1)
    if hx.shape[-1] != params.w_r.shape[1]:
        raise ValueError("input size does not match params")
    r_t = torch.sigmoid(hx @ params.w_r.T + params.b_r)
    z_t = torch.sigmoid(hx @ params.w_z.T + params.b_z)
    rhx = torch.cat([r_t * h_prev, x_t], dim=-1)
    h_tilde = torch.tanh(rhx @ params.w_h.T + params.b_h)
    return (1.0 - z_t) * h_prev + z_t * h_tilde


def _recurrent_weight(hidden: int, inp: int) -> nn.Parameter:
    w = torch.empty(hidden, hidden + inp)
    nn.init.orthogonal_(w)
    return nn.Parameter(w)


class LstmCell(nn.Module):
    def __init__(self, input_size: int, hidden_size: int):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        for gate in ("f", "i", "c", "o"):
            setattr(self, f"w_{gate}", _recurrent_weight(hidden_size, input_size))
            setattr(self, f"b_{gate}", nn.Parameter(torch.zeros(hidden_size)))
        # Forget-gate bias starts positive so early training retains state.
        with torch.no_grad():
            self.b_f.fill_(1.0)

    def params(self) -> LstmCellParams:
        return LstmCellParams(self.w_f, self.w_i, self.w_c, self.w_o,
                              self.b_f, self.b_i, self.b_c, self.b_o)

    def forward(self, x_t, h_prev, c_prev):
        return lstm_cell_step(x_t, h_prev, c_prev, self.params())


class GruCell(nn.Module):
    def __init__(self, input_size: int, hidden_size: int):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        for gate in ("r", "z", "h"):
            setattr(self, f"w_{gate}", _recurrent_weight(hidden_size, input_size))
            setattr(self, f"b_{gate}", nn.Parameter(torch.zeros(hidden_size)))

    def params(self) -> GruCellParams:
        return GruCellParams(self.w_r, self.w_z, self.w_h,
                             self.b_r, self.b_z, self.b_h)

    def forward(self, x_t, h_prev):
        return gru_cell_step(x_t, h_prev, self.params())


class Generator(nn.Module):
    def __init__(self, n_snapshots: int, n_delay_bins: int,
                 latent_dim: int = LATENT_DIM, n_classes: int = N_CLASSES,
                 recurrence: str = "lstm"):
        super().__init__()
        if recurrence not in ("lstm", "gru"):
            raise ValueError(f"unknown recurrence {recurrence!r}")
        self.n_snapshots = n_snapshots
        self.n_delay_bins = n_delay_bins
        self.latent_dim = latent_dim
        self.n_classes = n_classes
        self.recurrence = recurrence

        self.label_embedding = nn.Embedding(n_classes, latent_dim)
        nn.init.normal_(self.label_embedding.weight, 0.0, 1.0)
        self.fc1 = nn.Linear(latent_dim, 2048)
        self.bn1 = nn.BatchNorm1d(2048, momentum=BN_MOMENTUM)
        self.fc2 = nn.Linear(2048, 1000)
        self.bn2 = nn.BatchNorm1d(1000, momentum=BN_MOMENTUM)
        self.fc3 = nn.Linear(1000, n_snapshots * n_delay_bins)
        cell = LstmCell if recurrence == "lstm" else GruCell
        self.cell1 = cell(n_delay_bins, n_delay_bins)
        self.cell2 = cell(n_delay_bins, n_delay_bins)
        self.out_proj = nn.Linear(n_delay_bins, n_delay_bins)
        # Most grid cells of a masked PDP sit at -1; starting the output near
        # that level lets training spend its budget on the taps.
        with torch.no_grad():
            self.out_proj.bias.fill_(-2.0)
        self.act = nn.LeakyReLU(LEAKY_SLOPE)

    def forward(self, z: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        """z: (B, latent_dim), y: (B,) int labels -> (B, T, D) in (-1, 1)."""
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError("label out of range")
        x = self.label_embedding(y) * z
        x = self.act(self.bn1(self.fc1(x)))
        x = self.act(self.bn2(self.fc2(x)))
        x = self.fc3(x).view(-1, self.n_snapshots, self.n_delay_bins)

        if self.recurrence == "lstm":
            h1 = _lstm_sequence(x, self.cell1)
            h2 = _lstm_sequence(h1, self.cell2)
        else:
            h1 = _gru_sequence(x, self.cell1)
            h2 = _gru_sequence(h1, self.cell2)
        return torch.tanh(self.out_proj(h2))


def _lstm_sequence(x: torch.Tensor, cell: "LstmCell") -> torch.Tensor:
    """Run an LstmCell over a (B, T, D) sequence.

    Equivalent to looping lstm_cell_step, but the input-side half of every
    gate projection is computed for all timesteps in one matmul; only the
    hidden-side half runs inside the step loop.
    """
    B, T, _ = x.shape
    H = cell.hidden_size
    w = torch.cat([cell.w_f, cell.w_i, cell.w_c, cell.w_o])  # (4H, H + I)
    b = torch.cat([cell.b_f, cell.b_i, cell.b_c, cell.b_o])
    w_h, w_x = w[:, :H], w[:, H:]
    x_proj = x @ w_x.T + b  # (B, T, 4H)
    h = x.new_zeros(B, H)
    c = x.new_zeros(B, H)
    outs = []
    for t in range(T):
        gates = h @ w_h.T + x_proj[:, t]
        f, i, g, o = gates.split(H, dim=-1)
        c = torch.sigmoid(f) * c + torch.sigmoid(i) * torch.tanh(g)
        h = torch.sigmoid(o) * torch.tanh(c)
        outs.append(h)
    return torch.stack(outs, dim=1)


def _gru_sequence(x: torch.Tensor, cell: "GruCell") -> torch.Tensor:
    """Run a GruCell over a (B, T, D) sequence (same fusion as above)."""
    B, T, _ = x.shape
    H = cell.hidden_size
    w = torch.cat([cell.w_r, cell.w_z])  # (2H, H + I)
    b = torch.cat([cell.b_r, cell.b_z])
    w_h, w_x = w[:, :H], w[:, H:]
    wc_h, wc_x = cell.w_h[:, :H], cell.w_h[:, H:]
    x_proj = x @ w_x.T + b
    xc_proj = x @ wc_x.T + cell.b_h
    h = x.new_zeros(B, H)
    outs = []
    for t in range(T):
        gates = h @ w_h.T + x_proj[:, t]
        r, z = gates.split(H, dim=-1)
        r = torch.sigmoid(r)
        z = torch.sigmoid(z)
        h_tilde = torch.tanh((r * h) @ wc_h.T + xc_proj[:, t])
        h = (1.0 - z) * h + z * h_tilde
        outs.append(h)
    return torch.stack(outs, dim=1)


class Discriminator(nn.Module):
    def __init__(self, n_snapshots: int, n_delay_bins: int,
                 n_classes: int = N_CLASSES):
        super().__init__()
        flat = n_snapshots * n_delay_bins
        self.n_classes = n_classes
        self.flat = flat
        self.label_embedding = nn.Embedding(n_classes, flat)
        nn.init.normal_(self.label_embedding.weight, 0.0, 1.0)
        self.net = nn.Sequential(
            nn.Linear(flat, 2048),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Dropout(DROPOUT),
            nn.Linear(2048, 1024),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Dropout(DROPOUT),
            nn.Linear(1024, 512),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Dropout(DROPOUT),
            nn.Linear(512, 1),
        )

    def logits(self, pdp: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        """Pre-sigmoid scores; the training loop uses these for stability."""
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError("label out of range")
        x = pdp.reshape(pdp.shape[0], -1)
        if x.shape[1] != self.flat:
            raise ValueError("input shape does not match the configured grid")
        x = x * self.label_embedding(y)
        return self.net(x).squeeze(-1)

    def forward(self, pdp: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        """pdp: (B, T, D), y: (B,) -> (B,) probabilities in (0, 1)."""
        return torch.sigmoid(self.logits(pdp, y))
