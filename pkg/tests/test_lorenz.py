"""Lorenz pipeline: integration, z-maxima extraction, return-map
assembly, and the two-branch cusp fit (on synthetic data with known
answers, plus one short real trajectory)."""

import numpy as np
import pytest

from pwexpand import lorenz
from pwexpand.errors import ConfigError


def _synthetic_return_data(xs, ys):
    return lorenz.ReturnMapData(
        maxima=np.zeros(3), pairs=np.zeros((2, 2)),
        normalized_pairs=np.column_stack([xs, ys]),
        cusp_estimate=float(xs[np.argmax(ys)]),
        z_min=0.0, z_max=1.0)


# ----------------------------------------------------------------- config

def test_config_rejects_coarse_step():
    with pytest.raises(ConfigError):
        lorenz.LorenzConfig(dt=0.02)


def test_config_rejects_transient_swallowing_the_run():
    with pytest.raises(ConfigError):
        lorenz.LorenzConfig(t_max=40.0, transient=50.0)


# -------------------------------------------------------------- integrate

def test_integrate_is_bitwise_deterministic():
    cfg = lorenz.LorenzConfig(dt=0.01, t_max=10.0, transient=1.0)
    a = lorenz.integrate(cfg)
    b = lorenz.integrate(cfg)
    assert np.array_equal(a.xyz, b.xyz)
    assert np.array_equal(a.t, b.t)
    assert a.t[0] >= 1.0 - 1e-12


def test_integrate_below_onset_gives_no_oscillations():
    # rho = 0.5: the origin attracts and z decays monotonically, so the
    # maxima extractor has nothing to work with
    traj = lorenz.integrate(
        lorenz.LorenzConfig(rho=0.5, dt=0.01, t_max=60.0, transient=40.0))
    with pytest.raises(lorenz.InsufficientDataError):
        lorenz.extract_z_maxima(traj)


# -------------------------------------------------------- extract_z_maxima

def test_maxima_of_a_sine_are_all_one():
    t = np.arange(0.0, 100.0 + 1e-12, 0.01)
    z = np.sin(t)
    traj = lorenz.Trajectory(
        t=t, xyz=np.column_stack([np.zeros_like(t), np.zeros_like(t), z]))
    m = lorenz.extract_z_maxima(traj)
    # peaks at pi/2 + 2 pi k below 100; quadratic refinement nails them
    assert len(m) == 16
    assert np.max(np.abs(m - 1.0)) <= 1e-6


def test_maxima_of_a_monotone_signal_raise():
    t = np.arange(0.0, 5.0, 0.01)
    traj = lorenz.Trajectory(t=t, xyz=np.column_stack([t, t, t]))
    with pytest.raises(lorenz.InsufficientDataError):
        lorenz.extract_z_maxima(traj)


# --------------------------------------------------------- build_return_map

def test_return_map_of_three_points():
    data = lorenz.build_return_map(np.array([1.0, 2.0, 3.0]))
    assert data.z_min == 1.0 and data.z_max == 3.0
    assert np.array_equal(data.pairs, [[1.0, 2.0], [2.0, 3.0]])
    assert np.array_equal(data.normalized_pairs, [[0.0, 0.5], [0.5, 1.0]])
    assert data.cusp_estimate == 0.5


def test_return_map_rejects_constant_maxima():
    with pytest.raises(lorenz.DegenerateRangeError):
        lorenz.build_return_map(np.array([2.0, 2.0, 2.0]))


def test_return_map_rejects_too_few_maxima():
    with pytest.raises(lorenz.InsufficientDataError):
        lorenz.build_return_map(np.array([1.0, 2.0]))


def test_normalization_round_trips():
    rng = np.random.default_rng(0)
    m = 30.0 + 10.0 * rng.random(50)
    data = lorenz.build_return_map(m)
    back = data.normalized_pairs * (data.z_max - data.z_min) + data.z_min
    assert np.max(np.abs(back - data.pairs)) <= 1e-12


# ------------------------------------------------------------ fit_piecewise

def test_fit_recovers_a_tent_from_noisy_samples():
    rng = np.random.default_rng(11)
    xs = np.sort(rng.random(500))
    ys = np.where(xs <= 0.5, 2 * xs, 2 - 2 * xs)
    ys = ys + 1e-6 * rng.normal(size=500)
    data = _synthetic_return_data(xs, ys)
    pmap, diag = lorenz.fit_piecewise(data, 1)
    assert pmap.branch_count == 2
    assert diag.min_abs_slope_central[0] == pytest.approx(2.0, abs=1e-4)
    assert diag.min_abs_slope_central[1] == pytest.approx(2.0, abs=1e-4)
    assert max(diag.residual_rms) < 1e-4
    assert sum(diag.point_counts) == 500
    assert 0.05 <= diag.holder_exponent <= 1.0
    assert "indicative" in diag.caveat


def test_fit_reports_misfit_of_a_three_branch_cloud():
    # a sawtooth with three teeth cannot be explained by two branches:
    # the cusp lands near 1/3 and the right branch mixes two teeth
    rng = np.random.default_rng(12)
    xs = np.sort(rng.random(600))
    ys = (3.0 * xs) % 1.0
    data = _synthetic_return_data(xs, ys)
    try:
        _, diag = lorenz.fit_piecewise(data, 1)
    except lorenz.FitError:
        return
    assert max(diag.residual_rms) > 0.1


def test_fit_rejects_constant_model():
    rng = np.random.default_rng(13)
    xs = np.sort(rng.random(200))
    data = _synthetic_return_data(xs, np.where(xs <= 0.5, xs, 1 - xs) + 0.1)
    with pytest.raises(ConfigError):
        lorenz.fit_piecewise(data, 0)


def test_fit_rejects_sparse_data():
    xs = np.linspace(0.0, 1.0, 40)
    data = _synthetic_return_data(xs, np.where(xs <= 0.5, xs, 1 - xs))
    with pytest.raises(ConfigError):
        lorenz.fit_piecewise(data, 1)


def test_fit_rejects_an_empty_branch():
    # monotone data puts the peak at the right edge; nothing remains
    # for the second branch
    xs = np.linspace(0.0, 0.99, 120)
    data = _synthetic_return_data(xs, xs.copy())
    with pytest.raises(lorenz.FitError):
        lorenz.fit_piecewise(data, 1)


# ------------------------------------------------------------ full pipeline

def test_short_real_trajectory_has_the_known_shape():
    traj = lorenz.integrate(
        lorenz.LorenzConfig(dt=0.01, t_max=150.0, transient=5.0))
    maxima = lorenz.extract_z_maxima(traj)
    assert len(maxima) > 150
    data = lorenz.build_return_map(maxima)
    # classical parameters: z-maxima live around 30..47 with the cusp
    # near the middle of the normalized interval
    assert 25.0 < data.z_min < data.z_max < 60.0
    assert 0.3 < data.cusp_estimate < 0.7
