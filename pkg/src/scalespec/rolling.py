"""Rolling-window parameter tracks and variograms of track series.

One estimate per center time n0 = 1..N. Interior windows share detail
coefficients, so the track is computed from global per-scale detail
energies via prefix sums; boundary windows (narrowed, with the scale range
clamped to floor(Meff/2)) are handled one by one through the same fitting
code the scalar API uses. Degenerate windows are flagged, not fatal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fit as fit_mod
from .series import window_slice
from .spectrum import scale_spectrum
from .validation import as_float_vector, as_positive_int, check_open_unit, require


@dataclass(frozen=True)
class ParameterTrack:
    """Per-center-time estimates; NaN plus flags mark missing entries.

    center_indices 1-based n0 = 1..N
    h_track        Hurst estimates (constant H0 in fixed mode)
    sigma_annual_track
    misfit_track   log2 RMS misfits
    flags          True where the window was degenerate/unfittable
    config         dict echoing (M, j_i, j_e, mode, H0, steps_per_year)
    """

    center_indices: np.ndarray
    h_track: np.ndarray
    sigma_annual_track: np.ndarray
    misfit_track: np.ndarray
    flags: np.ndarray
    config: dict

    def __post_init__(self):
        n = self.center_indices.size
        for name in ("h_track", "sigma_annual_track", "misfit_track", "flags"):
            require(getattr(self, name).size == n,
                    f"{name} must match center_indices in length")


@dataclass(frozen=True)
class Variogram:
    """Semivariances gamma(lag) >= 0 at strictly increasing lags >= 1."""

    lags: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        require(self.lags.size == self.gamma.size, "lags and gamma must align")
        require(bool(np.all(self.lags >= 1)), "lags must be >= 1")
        require(bool(np.all(np.diff(self.lags) > 0)),
                "lags must be strictly increasing")
        finite = self.gamma[np.isfinite(self.gamma)]
        require(bool(np.all(finite >= 0)), "semivariance must be >= 0")


def _interior_spectra(q, m, j_i, j_e):
    """Spectra of all full-width windows at once, shape (n_scales, n_windows).

    Window starting at offset s sees exactly the global detail coefficients
    d_j(s+1 .. s+N_j), so per-window means come from prefix sums of the
    squared global details.
    """
    n = q.size
    scales = np.arange(j_i, j_e + 1)
    n_windows = n - m + 1
    starts = np.arange(n_windows)
    s_matrix = np.empty((scales.size, n_windows))
    # center at q_1 so constant stretches cancel exactly in the prefix sums
    csum = np.concatenate([[0.0], np.cumsum(q - q[0])])
    for idx, j in enumerate(scales):
        block = csum[j:] - csum[:-j]
        d = (block[:n - 2 * j + 1] - block[j:]) / math.sqrt(2.0 * j)
        prefix = np.concatenate([[0.0], np.cumsum(d * d)])
        count = m - 2 * j + 1
        s_matrix[idx] = (prefix[starts + count] - prefix[starts]) / count
    return scales, s_matrix


def _fit_tracks(scales, s_matrix, mode, h0):
    """Closed-form per-window fits on a spectrum matrix (scales x windows)."""
    x = np.log2(2.0 * scales.astype(float))
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log2(s_matrix)
    bad = ~np.all(np.isfinite(y), axis=0)
    y[:, bad] = 0.0   # placeholder; these columns are masked to NaN below

    if mode == "fixed_h":
        w = 1.0 / scales.astype(float)
        p0 = 2.0 * h0 + 1.0
        c = w @ (y - p0 * x[:, None]) / w.sum()
        h = np.full(c.shape, h0)
        resid = y - c - p0 * x[:, None]
        misfit = np.sqrt(np.mean(resid * resid, axis=0))
    else:
        results = {}
        for q_exp in (1, 3):
            w = 1.0 / scales.astype(float) ** q_exp
            sw = w.sum()
            sx = w @ x
            sxx = w @ (x * x)
            sy = w @ y
            sxy = (w * x) @ y
            det = sw * sxx - sx * sx
            p_q = (sw * sxy - sx * sy) / det
            c_q = (sxx * sy - sx * sxy) / det
            h_q = np.clip(0.5 * (p_q - 1.0), fit_mod.H_MIN, fit_mod.H_MAX)
            resid = y - c_q - p_q * x[:, None]
            misfit_q = np.sqrt(np.mean(resid * resid, axis=0))
            results[q_exp] = (c_q, h_q, misfit_q)
        c1, h1, m1 = results[1]
        c3, h3, m3 = results[3]
        pick = h3 > h1
        c = np.where(pick, c3, c1)
        h = np.where(pick, h3, h1)
        misfit = np.where(pick, m3, m1)

    sigma = np.where(bad, np.nan, 2.0 ** (0.5 * c))
    gains = fit_mod.h_scaling(np.where(bad | ~np.isfinite(h), 0.5, h))
    sigma = sigma / np.sqrt(gains)
    h = np.where(bad, np.nan, h)
    misfit = np.where(bad, np.nan, misfit)
    sigma = np.where(bad, np.nan, sigma)
    return h, sigma, misfit, bad


def _fit_one_window(window, j_i, j_e_requested, mode, h0):
    """Boundary-window fit; returns (h, sigma_step, misfit) or None to flag."""
    m_eff = window.effective_m
    j_e = min(j_e_requested, m_eff // 2)
    if j_e <= j_i:
        return None
    try:
        spec = scale_spectrum(window, j_i, j_e)
        if mode == "fixed_h":
            f = fit_mod.fixed_h_fit(spec, h0)
        else:
            f = fit_mod.robust_fit(spec)
    except ValueError:
        return None
    return f.h_hat, f.sigma_step, f.misfit


def rolling_estimates(series, m, j_i=1, j_e=None, mode="robust", h0=0.5,
                      steps_per_year=252):
    """Estimate (H, sigma_annual, misfit) for every center time n0 = 1..N.

    mode "robust" runs the max-of-two-weightings fit; "fixed_h" pins the
    slope at 2*h0 + 1. The scale range is [j_i, j_e] (j_e defaults to
    floor(M/2)) and is clamped per window at the boundaries. Windows with
    a degenerate spectrum or a collapsed scale range are flagged and the
    run continues.
    """
    require(series.kind == "log_price",
            f"rolling_estimates expects a log_price series, got {series.kind!r}")
    m = as_positive_int(m, "M", minimum=4)
    n = len(series)
    require(n >= m, f"window length M={m} exceeds series length {n}")
    j_i = as_positive_int(j_i, "j_i", minimum=1)
    if j_e is None:
        j_e = m // 2
    j_e = as_positive_int(j_e, "j_e", minimum=1)
    require(j_i < j_e <= m // 2,
            f"invalid scale range [{j_i}, {j_e}] for window length {m}")
    require(mode in ("robust", "fixed_h"), f"unknown mode {mode!r}")
    h0 = check_open_unit(h0, "H0")

    q = series.values
    half = m // 2
    h_track = np.full(n, np.nan)
    sigma_step_track = np.full(n, np.nan)
    misfit_track = np.full(n, np.nan)
    flags = np.ones(n, dtype=bool)

    # interior centers n0 = half .. n - m + half share the full window width
    scales, s_matrix = _interior_spectra(q, m, j_i, j_e)
    h_int, sigma_int, misfit_int, bad = _fit_tracks(scales, s_matrix, mode, h0)
    interior = slice(half - 1, half - 1 + (n - m + 1))   # 0-based track slots
    h_track[interior] = h_int
    sigma_step_track[interior] = sigma_int
    misfit_track[interior] = misfit_int
    flags[interior] = bad

    boundary = list(range(1, half)) + list(range(n - m + half + 1, n + 1))
    for n0 in boundary:
        window = window_slice(series, n0, m)
        result = _fit_one_window(window, j_i, j_e, mode, h0)
        if result is None:
            continue
        h_track[n0 - 1], sigma_step_track[n0 - 1], misfit_track[n0 - 1] = result
        flags[n0 - 1] = False

    with np.errstate(invalid="ignore"):
        sigma_annual = sigma_step_track * float(steps_per_year) ** h_track
    config = {
        "M": m, "j_i": j_i, "j_e": j_e, "mode": mode,
        "H0": h0 if mode == "fixed_h" else None,
        "steps_per_year": steps_per_year,
    }
    return ParameterTrack(
        center_indices=np.arange(1, n + 1),
        h_track=h_track,
        sigma_annual_track=sigma_annual,
        misfit_track=misfit_track,
        flags=flags,
        config=config,
    )


def variogram(values, max_lag):
    """Empirical semivariance gamma(l) = sum (z_{i+l} - z_i)^2 / (2 N_l).

    values may contain NaN for missing entries; pairs with a missing end
    are excluded and N_l counts only the valid pairs. max_lag must be
    smaller than the series length.
    """
    z = as_float_vector(values, "values", min_len=2, allow_nan=True)
    max_lag = as_positive_int(max_lag, "max_lag", minimum=1)
    require(max_lag < z.size,
            f"max_lag {max_lag} must be smaller than series length {z.size}")
    lags = np.arange(1, max_lag + 1)
    gamma = np.empty(lags.size)
    for idx, lag in enumerate(lags):
        diff = z[lag:] - z[:-lag]
        valid = np.isfinite(diff)
        n_valid = int(valid.sum())
        gamma[idx] = (float(np.sum(diff[valid] ** 2)) / (2.0 * n_valid)
                      if n_valid > 0 else np.nan)
    return Variogram(lags=lags, gamma=gamma)
