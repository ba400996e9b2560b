"""Generators: fGn/fBm exactness, mBm discretization, noise corruption."""

import math

import numpy as np
import pytest

import oracles
from scalespec.synth import (GaussianProcessSpec, add_white_noise,
                             c_normalization, fgn_covariance, sample_fgn,
                             synth_fbm, synth_mbm)


# ----------------------------------------------------------- covariance

def test_fgn_covariance_brownian_case():
    assert fgn_covariance(0.5, 1.0, 0) == 1.0
    for k in (1, 2, 5, 100):
        assert fgn_covariance(0.5, 1.0, k) == 0.0


def test_fgn_covariance_closed_form_value():
    got = fgn_covariance(0.7, 1.0, 1)
    assert abs(got - 0.5 * (2.0 ** 1.4 - 2.0)) < 1e-15


def test_fgn_covariance_lag_one_sign_tracks_h():
    for h in np.linspace(0.05, 0.45, 9):
        assert fgn_covariance(h, 1.0, 1) < 0
    for h in np.linspace(0.55, 0.95, 9):
        assert fgn_covariance(h, 1.0, 1) > 0


def test_fgn_covariance_vector_and_sigma_scaling():
    lags = np.arange(6)
    got = fgn_covariance(0.3, 2.0, lags)
    np.testing.assert_allclose(got, 4.0 * fgn_covariance(0.3, 1.0, lags),
                               rtol=1e-15)


def test_fgn_covariance_validation():
    with pytest.raises(ValueError, match="H must lie strictly between"):
        fgn_covariance(1.0, 1.0, 0)
    with pytest.raises(ValueError, match="sigma must be > 0"):
        fgn_covariance(0.5, 0.0, 0)
    with pytest.raises(ValueError, match="lag must be >= 0"):
        fgn_covariance(0.5, 1.0, -1)
    with pytest.raises(ValueError, match="lag must be an integer"):
        fgn_covariance(0.5, 1.0, 1.5)


# ------------------------------------------------------------- sampling

def test_sample_fgn_deterministic_and_batched():
    a = sample_fgn(0.7, 1.0, 64, np.random.default_rng(5))
    b = sample_fgn(0.7, 1.0, 64, np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)
    batch = sample_fgn(0.7, 1.0, 64, np.random.default_rng(5), size=3)
    assert batch.shape == (3, 64)
    batch2 = sample_fgn(0.7, 1.0, 64, np.random.default_rng(5), size=3)
    np.testing.assert_array_equal(batch, batch2)


def test_sample_fgn_dense_route_matches_target_moments():
    draws = sample_fgn(0.3, 1.5, 32, np.random.default_rng(8), size=4000,
                       method="dense")
    var = draws.var(axis=1).mean()
    assert abs(var / 1.5 ** 2 - 1.0) < 0.05


def test_sample_fgn_rejects_unknown_method():
    with pytest.raises(ValueError, match="unknown sampling method"):
        sample_fgn(0.5, 1.0, 8, np.random.default_rng(0), method="spectral")


def test_synth_fbm_starts_at_zero_with_stationary_increments():
    spec = GaussianProcessSpec(h_path=0.5, sigma_path=1.0, n=2 ** 14, seed=21)
    path = synth_fbm(spec)
    assert path.kind == "log_price"
    assert len(path) == 2 ** 14
    assert path.values[0] == 0.0
    inc = np.diff(path.values)
    n = inc.size
    # Brownian case: unit variance, 3 standard errors of the sample variance
    se = math.sqrt(2.0 / (n - 1))
    assert abs(inc.var(ddof=1) - 1.0) <= 3.0 * se


def test_synth_fbm_lag_one_covariance_persistent_case():
    spec = GaussianProcessSpec(h_path=0.7, sigma_path=1.0, n=2 ** 14, seed=4)
    inc = np.diff(synth_fbm(spec).values)
    n = inc.size
    sample = float(inc[:-1] @ inc[1:]) / (n - 1)
    target = fgn_covariance(0.7, 1.0, 1)
    se = oracles.autocov_standard_error(0.7, 1, n)
    assert abs(sample - target) <= 3.0 * se


def test_synth_fbm_bit_identical_for_same_seed():
    spec = GaussianProcessSpec(h_path=0.33, sigma_path=0.7, n=512, seed=99)
    np.testing.assert_array_equal(synth_fbm(spec).values,
                                  synth_fbm(spec).values)


def test_synth_fbm_requires_constant_positive_parameters():
    varying = GaussianProcessSpec(h_path=np.full(16, 0.5),
                                  sigma_path=np.linspace(1, 2, 16),
                                  n=16, seed=0)
    with pytest.raises(ValueError, match="constant h_path and sigma_path"):
        synth_fbm(varying)
    zero_sigma = GaussianProcessSpec(h_path=0.5, sigma_path=0.0, n=16, seed=0)
    with pytest.raises(ValueError, match="sigma > 0"):
        synth_fbm(zero_sigma)


def test_process_spec_validation():
    with pytest.raises(ValueError, match="strictly between 0 and 1"):
        GaussianProcessSpec(h_path=1.2, sigma_path=1.0, n=8, seed=0)
    with pytest.raises(ValueError, match="must be >= 0"):
        GaussianProcessSpec(h_path=0.5, sigma_path=-1.0, n=8, seed=0)
    with pytest.raises(ValueError, match="scalar or length n"):
        GaussianProcessSpec(h_path=np.full(5, 0.5), sigma_path=1.0, n=8, seed=0)
    with pytest.raises(ValueError, match="n must be an integer >= 2"):
        GaussianProcessSpec(h_path=0.5, sigma_path=1.0, n=1, seed=0)


# -------------------------------------------------------- normalization

def test_c_normalization_brownian_value():
    assert abs(c_normalization(0.5) / (2.0 * math.pi) - 1.0) < 1e-12


def test_c_normalization_quarter_value():
    expect = math.pi / (0.25 * math.gamma(0.5) * math.sin(math.pi / 4.0))
    assert abs(c_normalization(0.25) / expect - 1.0) < 1e-12


def test_c_normalization_matches_quadrature_across_range():
    for h in np.linspace(0.1, 0.9, 9):
        closed = c_normalization(float(h))
        integral = oracles.quad_c_normalization(float(h))
        assert abs(closed / integral - 1.0) < 1e-6


# ---------------------------------------------------------------- mBm

def test_synth_mbm_matches_direct_sum_on_grid_node_h():
    # constant H on the internal 0.01 interpolation grid: the cubic stencil
    # passes through the node, so transform and direct sum must agree
    spec = GaussianProcessSpec(h_path=0.37, sigma_path=1.3, n=16, seed=5)
    got = synth_mbm(spec, freq_grid_size=2 ** 12).values
    ref = oracles.direct_mbm_values(0.37, 1.3, 16, 5, 2 ** 12)
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-9)


def test_synth_mbm_matches_direct_sum_on_piecewise_node_path():
    h_path = np.repeat([0.31, 0.64], 8)
    spec = GaussianProcessSpec(h_path=h_path, sigma_path=2.0, n=16, seed=13)
    got = synth_mbm(spec, freq_grid_size=2 ** 12).values
    ref = oracles.direct_mbm_values(h_path, 2.0, 16, 13, 2 ** 12)
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-9)


def test_synth_mbm_off_node_interpolation_error_is_small():
    h_path = np.linspace(0.3, 0.7, 16)
    spec = GaussianProcessSpec(h_path=h_path, sigma_path=1.0, n=16, seed=9)
    got = synth_mbm(spec, freq_grid_size=2 ** 12).values
    ref = oracles.direct_mbm_values(h_path, 1.0, 16, 9, 2 ** 12)
    scale = float(np.max(np.abs(ref)))
    assert float(np.max(np.abs(got - ref))) < 1e-4 * scale


def test_synth_mbm_zero_sigma_gives_zero_path():
    spec = GaussianProcessSpec(h_path=0.4, sigma_path=0.0, n=64, seed=2)
    np.testing.assert_array_equal(synth_mbm(spec, freq_grid_size=2 ** 12).values,
                                  np.zeros(64))


def test_synth_mbm_increment_variance_matches_grid_formula():
    # the discretized generator has an exactly computable increment
    # variance (band-limited, hence below sigma^2); Monte Carlo over a few
    # paths should sit on it
    n, k_grid = 2048, 2 ** 13
    expect = oracles.mbm_increment_variance(0.5, 1.0, n, k_grid)
    assert expect < 1.0
    samples = []
    for seed in range(4):
        spec = GaussianProcessSpec(h_path=0.5, sigma_path=1.0, n=n, seed=seed)
        samples.append(np.diff(synth_mbm(spec, freq_grid_size=k_grid).values))
    var = float(np.concatenate(samples).var())
    assert abs(var / expect - 1.0) < 0.06


def test_synth_mbm_constant_h_covariance_close_to_exact_fbm():
    # distributional check on a coarse time grid; tolerance covers Monte
    # Carlo error (4 standard errors) plus the small band-limiting deficit
    n, k_grid, reps, h = 64, 2 ** 12, 500, 0.6
    idx = np.array([8, 16, 32, 63])
    paths = np.empty((reps, idx.size))
    for r in range(reps):
        spec = GaussianProcessSpec(h_path=h, sigma_path=1.0, n=n, seed=1000 + r)
        paths[r] = synth_mbm(spec, freq_grid_size=k_grid).values[idx]
    sample_cov = np.cov(paths.T, ddof=1)
    t = idx.astype(float)
    theory = 0.5 * (t[:, None] ** (2 * h) + t[None, :] ** (2 * h)
                    - np.abs(t[:, None] - t[None, :]) ** (2 * h))
    mc_se = np.sqrt((theory ** 2 + np.outer(np.diag(theory), np.diag(theory)))
                    / reps)
    assert np.all(np.abs(sample_cov - theory) <= 4.0 * mc_se + 0.05 * np.abs(theory))


def test_synth_mbm_deterministic():
    spec = GaussianProcessSpec(h_path=np.linspace(0.3, 0.7, 32),
                               sigma_path=1.0, n=32, seed=77)
    a = synth_mbm(spec, freq_grid_size=2 ** 12).values
    b = synth_mbm(spec, freq_grid_size=2 ** 12).values
    np.testing.assert_array_equal(a, b)


def test_synth_mbm_grid_validation():
    spec = GaussianProcessSpec(h_path=0.5, sigma_path=1.0, n=2048, seed=0)
    with pytest.raises(ValueError, match="frequency grid too coarse"):
        synth_mbm(spec, freq_grid_size=2 ** 11)
    with pytest.raises(ValueError, match="too small for series length"):
        synth_mbm(spec, freq_grid_size=2 ** 12)
    small = GaussianProcessSpec(h_path=0.5, sigma_path=1.0, n=16, seed=0)
    with pytest.raises(ValueError, match="must be even"):
        synth_mbm(small, freq_grid_size=2 ** 12 + 1)
    with pytest.raises(ValueError, match="freq_cutoff must be > 0"):
        synth_mbm(small, freq_grid_size=2 ** 12, freq_cutoff=0.0)


# ---------------------------------------------------------- white noise

def test_add_white_noise_zero_std_is_identity():
    s = synth_fbm(GaussianProcessSpec(h_path=0.5, sigma_path=1.0, n=64, seed=1))
    out = add_white_noise(s, 0.0, seed=5)
    np.testing.assert_array_equal(out.values, s.values)
    assert out.kind == s.kind


def test_add_white_noise_std_matches_request():
    s = synth_fbm(GaussianProcessSpec(h_path=0.5, sigma_path=1.0,
                                      n=2 ** 14, seed=3))
    out = add_white_noise(s, 0.1, seed=11)
    diff = out.values - s.values
    n = diff.size
    se = 0.1 / math.sqrt(2.0 * n)
    assert abs(diff.std(ddof=1) - 0.1) <= 3.0 * se


def test_add_white_noise_deterministic_and_validated():
    s = synth_fbm(GaussianProcessSpec(h_path=0.5, sigma_path=1.0, n=32, seed=3))
    np.testing.assert_array_equal(add_white_noise(s, 0.2, seed=7).values,
                                  add_white_noise(s, 0.2, seed=7).values)
    with pytest.raises(ValueError, match="noise_std must be >= 0"):
        add_white_noise(s, -0.1, seed=7)
