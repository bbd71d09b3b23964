import numpy as np
import pytest
import torch

from chanforge.model import (LATENT_DIM, Discriminator, Generator, GruCell,
                             GruCellParams, LstmCell, LstmCellParams,
                             gru_cell_step, lstm_cell_step)


def zero_lstm_params(hidden, inp):
    shape = (hidden, hidden + inp)
    z = lambda: torch.zeros(shape, dtype=torch.float64)
    b = lambda: torch.zeros(hidden, dtype=torch.float64)
    return LstmCellParams(z(), z(), z(), z(), b(), b(), b(), b())


def zero_gru_params(hidden, inp):
    shape = (hidden, hidden + inp)
    z = lambda: torch.zeros(shape, dtype=torch.float64)
    b = lambda: torch.zeros(hidden, dtype=torch.float64)
    return GruCellParams(z(), z(), z(), b(), b(), b())


def test_lstm_step_zero_params_hand_case():
    # All gates sigmoid(0) = 0.5 and candidate tanh(0) = 0, so
    # c_t = 0.5 c_prev and h_t = 0.5 tanh(0.5 c_prev).
    params = zero_lstm_params(2, 3)
    x = torch.ones(3, dtype=torch.float64)
    h0 = torch.zeros(2, dtype=torch.float64)
    c0 = torch.tensor([1.0, -2.0], dtype=torch.float64)
    h1, c1 = lstm_cell_step(x, h0, c0, params)
    np.testing.assert_allclose(c1.numpy(), [0.5, -1.0])
    np.testing.assert_allclose(h1.numpy(), 0.5 * np.tanh([0.5, -1.0]))


def test_gru_step_zero_params_hand_case():
    # r = z = 0.5, candidate 0: h_t = 0.5 h_prev.
    params = zero_gru_params(2, 3)
    x = torch.ones(3, dtype=torch.float64)
    h0 = torch.tensor([1.0, -0.4], dtype=torch.float64)
    h1 = gru_cell_step(x, h0, params)
    np.testing.assert_allclose(h1.numpy(), [0.5, -0.2])


def test_lstm_step_forget_gate_saturated():
    # Huge forget bias, inhibited input gate: the cell state passes through.
    params = zero_lstm_params(2, 2)
    params.b_f.fill_(50.0)
    params.b_i.fill_(-50.0)
    x = torch.zeros(2, dtype=torch.float64)
    c0 = torch.tensor([0.3, -0.7], dtype=torch.float64)
    _, c1 = lstm_cell_step(x, torch.zeros(2, dtype=torch.float64), c0, params)
    np.testing.assert_allclose(c1.numpy(), c0.numpy(), atol=1e-12)


def test_cell_steps_validate_shapes():
    params = zero_lstm_params(2, 3)
    with pytest.raises(ValueError):
        lstm_cell_step(torch.zeros(3), torch.zeros(5), torch.zeros(5), params)
    with pytest.raises(ValueError):
        lstm_cell_step(torch.zeros(9), torch.zeros(2), torch.zeros(2), params)
    gparams = zero_gru_params(2, 3)
    with pytest.raises(ValueError):
        gru_cell_step(torch.zeros(3), torch.zeros(4), gparams)


def test_cell_modules_match_functional_steps():
    torch.manual_seed(0)
    lstm = LstmCell(4, 3)
    x = torch.randn(5, 4)
    h = torch.randn(5, 3)
    c = torch.randn(5, 3)
    h1, c1 = lstm(x, h, c)
    h2, c2 = lstm_cell_step(x, h, c, lstm.params())
    assert torch.equal(h1, h2) and torch.equal(c1, c2)

    gru = GruCell(4, 3)
    g1 = gru(x, h)
    g2 = gru_cell_step(x, h, gru.params())
    assert torch.equal(g1, g2)


def test_lstm_forget_bias_initialized_positive():
    cell = LstmCell(4, 3)
    assert torch.all(cell.b_f == 1.0)


@pytest.mark.parametrize("recurrence", ["lstm", "gru"])
def test_generator_output_shape_and_range(recurrence):
    torch.manual_seed(0)
    gen = Generator(6, 16, recurrence=recurrence)
    gen.eval()
    z = torch.randn(3, LATENT_DIM)
    y = torch.tensor([0, 1, 0])
    out = gen(z, y)
    assert out.shape == (3, 6, 16)
    assert out.min() >= -1.0 and out.max() <= 1.0


def test_generator_conditions_on_label():
    torch.manual_seed(0)
    gen = Generator(6, 16)
    gen.eval()
    z = torch.randn(2, LATENT_DIM)
    out0 = gen(z, torch.tensor([0, 0]))
    out1 = gen(z, torch.tensor([1, 1]))
    assert not torch.allclose(out0, out1)


def test_generator_rejects_bad_recurrence():
    with pytest.raises(ValueError):
        Generator(6, 16, recurrence="rnn")


def test_discriminator_probability_and_logits():
    torch.manual_seed(0)
    disc = Discriminator(6, 16)
    disc.eval()
    pdp = torch.rand(4, 6, 16) * 2.0 - 1.0
    y = torch.tensor([0, 1, 1, 0])
    probs = disc(pdp, y)
    logits = disc.logits(pdp, y)
    assert probs.shape == (4,) or probs.shape == (4, 1)
    assert torch.all(probs > 0) and torch.all(probs < 1)
    assert torch.allclose(probs, torch.sigmoid(logits))


def test_discriminator_conditions_on_label():
    torch.manual_seed(0)
    disc = Discriminator(6, 16)
    disc.eval()
    pdp = torch.rand(2, 6, 16)
    l0 = disc.logits(pdp, torch.tensor([0, 0]))
    l1 = disc.logits(pdp, torch.tensor([1, 1]))
    assert not torch.allclose(l0, l1)
