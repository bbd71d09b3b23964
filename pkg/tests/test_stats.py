import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from chanforge.stats import (FEATURE_NAMES, UndefinedStatisticError,
                             channel_features, db_to_linear, fid,
                             multipath_count, path_loss, rmsds,
                             shadow_fading, stats_summary, tpcc, tpcc_matrix,
                             wss_interval_mean, wss_intervals)
from conftest import make_pdp

lin_pdp = hnp.arrays(
    dtype=np.float64, shape=st.integers(2, 12),
    elements=st.floats(0.0, 1e3, allow_nan=False, allow_infinity=False),
)


def naive_tpcc_matrix(P_lin):
    """Reference double loop for the discrete correlation matrix."""
    T = P_lin.shape[0]
    c = np.empty((T, T))
    for i in range(T):
        for j in range(T):
            num = float(np.sum(P_lin[i] * P_lin[j]))
            den = max(float(np.sum(P_lin[i] ** 2)), float(np.sum(P_lin[j] ** 2)))
            c[i, j] = num / den
    return c


def test_tpcc_identical_is_one():
    p = np.array([1.0, 2.0, 0.5])
    assert tpcc(p, p) == pytest.approx(1.0)


def test_tpcc_disjoint_is_zero():
    assert tpcc(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_tpcc_hand_value():
    # num = 1, den = max(1, 2) = 2
    assert tpcc(np.array([1.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(0.5)


@given(lin_pdp, st.floats(0.1, 10.0))
@settings(max_examples=50, deadline=None)
def test_tpcc_scale_invariant_and_bounded(p, scale):
    q = p[::-1].copy()
    if p @ p == 0 or q @ q == 0:
        return
    c = tpcc(p, q)
    assert 0.0 <= c <= 1.0 + 1e-12
    assert tpcc(scale * p, scale * q) == pytest.approx(c, rel=1e-12)


def test_tpcc_rejects_negative_power():
    with pytest.raises(ValueError):
        tpcc(np.array([-1.0, 2.0]), np.array([1.0, 1.0]))


def test_tpcc_all_zero_undefined():
    with pytest.raises(UndefinedStatisticError):
        tpcc(np.zeros(3), np.zeros(3))


def test_tpcc_matrix_matches_naive_loop():
    rng = np.random.default_rng(0)
    P_db = rng.uniform(-120.0, -60.0, size=(6, 10))
    ch = make_pdp(P_db, los_bin_index=2)
    c = tpcc_matrix(ch, exclude_los=False)
    np.testing.assert_allclose(c, naive_tpcc_matrix(db_to_linear(P_db)),
                               atol=1e-12)
    assert np.allclose(c, c.T)
    np.testing.assert_allclose(np.diag(c), 1.0)


def test_tpcc_matrix_los_exclusion():
    # Snapshots differ only at the LOS bin; with the LOS (and guard bins)
    # zeroed they are identical.
    P = np.full((3, 8), -100.0)
    P[0, 3] = -40.0
    P[1, 3] = -60.0
    P[2, 4] = -50.0  # guard bin next to LOS
    ch = make_pdp(P, los_bin_index=3)
    c = tpcc_matrix(ch, exclude_los=True)
    np.testing.assert_allclose(c, 1.0)
    c_incl = tpcc_matrix(ch, exclude_los=False)
    assert c_incl[0, 1] < 1.0


def test_wss_intervals_static_channel_runs_to_end():
    P = np.tile(np.array([-80.0, -90.0, -100.0, -150.0]), (4, 1))
    ch = make_pdp(P, dt=1.0, los_bin_index=0)
    np.testing.assert_allclose(wss_intervals(ch, exclude_los=False),
                               [4.0, 3.0, 2.0, 1.0])
    assert wss_interval_mean(ch) == pytest.approx(2.5)


def test_wss_intervals_first_crossing():
    # Snapshot 2 is orthogonal to snapshots 0 and 1, so their intervals stop
    # there; snapshot 2's own interval runs to the end.
    P = np.array([
        [-40.0, -150.0, -150.0, -150.0],
        [-40.0, -150.0, -150.0, -150.0],
        [-150.0, -40.0, -150.0, -150.0],
    ])
    ch = make_pdp(P, dt=0.5, los_bin_index=3)
    np.testing.assert_allclose(wss_intervals(ch, exclude_los=False),
                               [1.0, 0.5, 0.5])


def test_wss_uses_time_grid_spacing():
    P = np.tile(np.array([-80.0, -90.0]), (3, 1))
    ch = make_pdp(P, dt=0.25, los_bin_index=0)
    np.testing.assert_allclose(wss_intervals(ch, exclude_los=False),
                               [0.75, 0.5, 0.25])


def test_rmsds_single_tap_is_zero():
    p = np.array([0.0, 1e-8, 0.0, 0.0])
    tau = np.arange(4.0) * 6.67
    assert rmsds(p, tau) == pytest.approx(0.0, abs=1e-6)


def test_rmsds_two_equal_taps():
    # Equal taps 10 ns apart: rms spread is half the separation.
    p = np.zeros(12)
    p[1], p[11] = 1e-8, 1e-8
    tau = np.arange(12.0)  # 1 ns spacing
    assert rmsds(p, tau) == pytest.approx(5.0, abs=1e-12)


def test_rmsds_excludes_floor_bins():
    p = np.array([1e-8, 1e-16, 1e-16])  # trailing bins below -150 dB
    tau = np.array([0.0, 10.0, 20.0])
    assert rmsds(p, tau, noise_floor=-150.0) == pytest.approx(0.0, abs=1e-12)


def test_rmsds_all_floor_undefined():
    with pytest.raises(UndefinedStatisticError):
        rmsds(np.full(3, 1e-16), np.arange(3.0))


def test_multipath_count_strictly_above_floor():
    row = np.array([-150.0, -149.9, -80.0, -150.0])
    assert multipath_count(row, noise_floor=-150.0) == 2


def test_path_loss_hand_value():
    assert path_loss(np.array([5e-9, 5e-9])) == pytest.approx(80.0)
    with pytest.raises(UndefinedStatisticError):
        path_loss(np.zeros(3))


def test_shadow_fading_centered():
    sf = shadow_fading(np.array([80.0, 82.0, 84.0]))
    np.testing.assert_allclose(sf, [-2.0, 0.0, 2.0])
    assert sf.mean() == pytest.approx(0.0)


def test_fid_identical_sets_zero():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(50, 3))
    assert fid(x, x) == pytest.approx(0.0, abs=1e-10)


def test_fid_1d_closed_form():
    # 1-D: (mu_x - mu_g)^2 + (sd_x - sd_g)^2 with ddof=1 sample stats.
    x = np.array([0.0, 1.0, 2.0])  # mean 1, sd 1
    g = np.array([1.0, 2.0, 3.0])  # mean 2, sd 1
    assert fid(x, g) == pytest.approx(1.0, abs=1e-12)
    g2 = np.array([0.0, 2.0, 4.0])  # mean 2, sd 2
    assert fid(x, g2) == pytest.approx(1.0 + 1.0, abs=1e-12)


def test_fid_needs_two_samples():
    with pytest.raises(ValueError):
        fid(np.array([1.0]), np.array([1.0, 2.0]))


def test_channel_features_keys(tiny_dataset):
    feats = channel_features(tiny_dataset.channels[0], noise_floor=-150.0)
    assert set(feats) == {"wss_interval", "rmsds", "multipath_count", "path_loss"}
    assert all(np.isfinite(v) for v in feats.values())


def test_stats_summary_structure(tiny_dataset):
    s = stats_summary(tiny_dataset)
    assert set(s.means) == {"weak", "strong"}
    for cat in s.means:
        assert set(s.means[cat]) == set(FEATURE_NAMES)
        assert s.counts[cat] == 4
        for name in FEATURE_NAMES:
            assert s.samples[cat][name].shape == (4,)
    # Shadow fading is centered within each category.
    assert s.means["weak"]["shadow_fading"] == pytest.approx(0.0, abs=1e-9)


def test_stats_summary_rejects_normalized(tiny_preprocessed):
    with pytest.raises(ValueError):
        stats_summary(tiny_preprocessed)
