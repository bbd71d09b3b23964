import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from chanforge.preprocess import (DegenerateInputError, apply_mask,
                                  denormalize, mask, normalize,
                                  preprocess_dataset)

finite_db = hnp.arrays(
    dtype=np.float64,
    shape=st.tuples(st.integers(2, 6), st.integers(2, 8)),
    elements=st.floats(-160.0, -40.0, allow_nan=False, allow_infinity=False),
)


def test_mask_semantics():
    P = np.array([[-80.0, -155.0], [-150.0, -90.0]])
    Pm, m = mask(P, threshold=-150.0)
    np.testing.assert_array_equal(m, [[1.0, 0.0], [1.0, 1.0]])
    np.testing.assert_array_equal(Pm, [[-80.0, -150.0], [-150.0, -90.0]])


def test_mask_rejects_non_finite():
    with pytest.raises(ValueError):
        mask(np.array([[np.nan, -80.0]]), threshold=-150.0)


@given(finite_db)
@settings(max_examples=50, deadline=None)
def test_mask_idempotent(P):
    Pm, m = mask(P, threshold=-150.0)
    Pm2, m2 = mask(Pm, threshold=-150.0)
    np.testing.assert_array_equal(Pm, Pm2)
    assert np.all(m2 >= m)  # re-masking never removes kept cells


@given(finite_db)
@settings(max_examples=50, deadline=None)
def test_normalize_denormalize_round_trip(P):
    if P.max() == P.min():
        P = P + np.linspace(0.0, 1.0, P.size).reshape(P.shape)
    P_norm, bounds = normalize(P)
    assert P_norm.min() >= -1.0 - 1e-12 and P_norm.max() <= 1.0 + 1e-12
    back = denormalize(P_norm, bounds)
    np.testing.assert_allclose(back, P, atol=1e-9)


def test_normalize_with_shared_bounds():
    P = np.array([[-100.0, -50.0]])
    P_norm, _ = normalize(P, bounds=(-150.0, -50.0))
    np.testing.assert_allclose(P_norm, [[0.0, 1.0]])


def test_normalize_degenerate_raises():
    with pytest.raises(DegenerateInputError):
        normalize(np.full((2, 2), -80.0))


def test_apply_mask_pins_to_minus_one():
    P_norm = np.array([[0.5, -0.2], [0.0, 1.0]])
    m = np.array([[1.0, 0.0], [0.0, 1.0]])
    out = apply_mask(P_norm, m)
    np.testing.assert_array_equal(out, [[0.5, -1.0], [-1.0, 1.0]])


def test_apply_mask_shape_mismatch():
    with pytest.raises(ValueError):
        apply_mask(np.zeros((2, 2)), np.zeros((2, 3)))


def test_full_composition_on_2x2():
    # Mask at -150, normalize over [-150, -50], pin masked cells to -1.
    P = np.array([[-50.0, -100.0], [-150.0, -170.0]])
    Pm, m = mask(P, threshold=-150.0)
    P_norm, bounds = normalize(Pm)
    out = apply_mask(P_norm, m)
    assert bounds == (-150.0, -50.0)
    np.testing.assert_allclose(out, [[1.0, 0.0], [-1.0, -1.0]])
    # Kept cells invert exactly; the masked cell returns at the threshold.
    back = denormalize(out, bounds)
    np.testing.assert_allclose(back[0], P[0], atol=1e-12)
    assert back[1, 0] == -150.0  # kept (at threshold)
    assert back[1, 1] == -150.0  # masked (-170 clipped to threshold)


def test_preprocess_dataset_manifest_and_range(tiny_dataset):
    pre = preprocess_dataset(tiny_dataset)
    m = pre.manifest
    assert m["space"] == "normalized"
    assert m["bounds"]["p_min"] < m["bounds"]["p_max"]
    assert m["threshold_db"] == -150.0
    t = pre.tensor()
    assert t.min() >= -1.0 and t.max() <= 1.0
    # Grids and labels carry through untouched.
    assert m["labels"] == tiny_dataset.manifest["labels"]
    assert pre.channels[0].los_bin_index == tiny_dataset.channels[0].los_bin_index


def test_preprocess_dataset_round_trip(tiny_dataset):
    pre = preprocess_dataset(tiny_dataset)
    bounds = (pre.manifest["bounds"]["p_min"], pre.manifest["bounds"]["p_max"])
    for raw, norm in zip(tiny_dataset.channels, pre.channels):
        back = denormalize(norm.power, bounds)
        # Cells above the threshold are recovered exactly; masked cells
        # return at the threshold.
        kept = raw.power >= -150.0
        np.testing.assert_allclose(back[kept], raw.power[kept], atol=1e-9)
        assert np.all(back[~kept] == -150.0)


def test_preprocess_rejects_double_application(tiny_preprocessed):
    with pytest.raises(ValueError):
        preprocess_dataset(tiny_preprocessed)
