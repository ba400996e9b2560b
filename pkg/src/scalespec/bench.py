"""Monte Carlo estimator comparison harness.

Benchmarks four Hurst estimators (robust two-weighting fit, linear-weight
GLS, full-covariance GLS, Gaussian ML) on synthetic paths, clean and
noise-corrupted, and reports per-scale residual ratios of the robust fit
against the line the ML estimate implies. The full-covariance variant
lives here because it needs the closed-form spectrum covariance below and
is exercised only for this comparison.
"""

from __future__ import annotations

import numpy as np

from . import fit as fit_mod
from .mle import ml_fit
from .series import AnalysisWindow
from .spectrum import scale_spectrum
from .synth import GaussianProcessSpec, add_white_noise, fgn_covariance, synth_fbm
from .validation import as_positive_int, check_open_unit, require

ESTIMATORS = ("robust", "gls_linear", "gls_full_covariance", "ml")


def _detail_cross_covariance(h, j1, j2, n1, n2):
    """Cov(S_j1, S_j2) and the exact means, for unit-sigma paths.

    A scale-j detail is a triangular filter of the unit-step increments, so
    detail cross-covariances are triangle-correlation sums over the fGn
    autocovariance; squaring and counting offset multiplicities gives the
    covariance of the two mean-square energies (fourth Gaussian moments
    factor through the squared second moments).
    """
    t1 = np.convolve(np.ones(j1), np.ones(j1))
    t2 = np.convolve(np.ones(j2), np.ones(j2))
    a = np.convolve(t1, t2[::-1])[::-1]   # A(s) for s = smin..smax
    smin, smax = -(2 * j1 - 2), 2 * j2 - 2
    dmin, dmax = 1 - n1, n2 - 1
    gam = fgn_covariance(h, 1.0,
                         np.abs(np.arange(dmin + smin, dmax + smax + 1)))
    c_all = np.correlate(gam, a, mode="valid") / (2.0 * np.sqrt(j1 * j2))
    deltas = np.arange(dmin, dmax + 1)
    cnt = (np.minimum(n1 - 1, n2 - 1 - deltas)
           - np.maximum(0, -deltas) + 1)
    cov = 2.0 / (n1 * n2) * float(cnt @ (c_all * c_all))
    mean1 = float(c_all[-dmin]) if j1 == j2 else None   # c(0) on the diagonal
    return cov, mean1


def log_spectrum_covariance(h, m_tilde, j_lo, j_hi):
    """Delta-method covariance of (log2 S_j) for unit-sigma fGn increments.

    Returns (R, means) where means are the exact discrete E S_j. Used as
    the weighting matrix of the full-covariance GLS; sigma cancels from R
    because log covariances are scale-free.
    """
    h = check_open_unit(h, "H")
    m_tilde = as_positive_int(m_tilde, "window length", minimum=4)
    j_lo = as_positive_int(j_lo, "j_i", minimum=1)
    j_hi = as_positive_int(j_hi, "j_e", minimum=1)
    require(j_lo <= j_hi <= m_tilde // 2,
            f"invalid scale range [{j_lo}, {j_hi}] for window length {m_tilde}")
    scales = np.arange(j_lo, j_hi + 1)
    counts = m_tilde - 2 * scales + 1
    k = scales.size
    cov_s = np.empty((k, k))
    means = np.empty(k)
    for a in range(k):
        cov_aa, mean_a = _detail_cross_covariance(
            h, int(scales[a]), int(scales[a]), int(counts[a]), int(counts[a]))
        cov_s[a, a] = cov_aa
        means[a] = mean_a
        for b in range(a + 1, k):
            cov_ab, _ = _detail_cross_covariance(
                h, int(scales[a]), int(scales[b]), int(counts[a]), int(counts[b]))
            cov_s[a, b] = cov_ab
            cov_s[b, a] = cov_ab
    log2_sq = np.log(2.0) ** 2
    r_matrix = cov_s / (np.outer(means, means) * log2_sq)
    return r_matrix, means


def fullcov_gls_fit(spectrum, cache=None):
    """GLS line fit weighting by the full log-spectrum covariance.

    The covariance needs an H to be evaluated at; a linear-weight pilot
    fit supplies it, quantized to a 0.02 grid so a caller-held cache dict
    can reuse matrices across replicas of equal shape.
    """
    y, x = fit_mod._check_spectrum(spectrum)
    pilot = fit_mod.gls_fit(spectrum, 1).h_hat
    h_pilot = min(max(round(pilot * 50.0) / 50.0, 0.02), 0.98)
    m_tilde = spectrum.window_meta[0]
    j_lo, j_hi = spectrum.j_range
    key = (h_pilot, m_tilde, j_lo, j_hi)
    if cache is not None and key in cache:
        r_matrix = cache[key]
    else:
        r_matrix, _ = log_spectrum_covariance(h_pilot, m_tilde, j_lo, j_hi)
        if cache is not None:
            cache[key] = r_matrix
    design = np.column_stack([np.ones(x.size), x])
    c, p = _gls_solve(r_matrix, design, y)
    h_hat = fit_mod.clamp_h(0.5 * (p - 1.0))
    return fit_mod._finish(c, p, h_hat, y, x, spectrum.j_range,
                           "full_covariance")


def _gls_solve(r_matrix, design, y):
    rhs = np.column_stack([design, y])
    jitter = 0.0
    base = float(np.trace(r_matrix)) / r_matrix.shape[0]
    for _ in range(3):
        try:
            sol = np.linalg.solve(
                r_matrix + jitter * np.eye(r_matrix.shape[0]), rhs)
            normal = design.T @ sol[:, :2]
            beta = np.linalg.solve(normal, design.T @ sol[:, 2])
            if np.all(np.isfinite(beta)):
                return float(beta[0]), float(beta[1])
        except np.linalg.LinAlgError:
            pass
        jitter = base * 1e-10 if jitter == 0.0 else jitter * 1e4
    raise ValueError("full-covariance weighting matrix is numerically singular")


def bench_estimators(h_values, noise_std, replicas, n, seed, j_i=1, j_e=None):
    """Monte Carlo comparison table over H values and noise levels.

    For each H, draws `replicas` fBm paths of n values (sigma = 1), fits
    each clean path and, when noise_std > 0, the same path with additive
    white observation noise of noise_std times the per-step increment
    standard deviation. Returns (rows, residual_rows):

    rows           (H, noise, estimator, mean_h, std_h, bias)
    residual_rows  (H, noise, scale_steps, ratio) with ratio the
                   replica-mean squared log2 residual of the robust fit
                   over that of the ML-implied line, per scale
    """
    h_list = [check_open_unit(h, "H") for h in np.atleast_1d(h_values)]
    require(float(noise_std) >= 0, "noise_std must be >= 0")
    replicas = as_positive_int(replicas, "replicas", minimum=10)
    n = as_positive_int(n, "n", minimum=32)
    j_i = as_positive_int(j_i, "j_i", minimum=1)
    if j_e is None:
        j_e = n // 2
    j_e = as_positive_int(j_e, "j_e", minimum=1)
    require(j_i < j_e <= n // 2,
            f"invalid scale range [{j_i}, {j_e}] for series length {n}")

    noise_levels = [0.0] if float(noise_std) == 0.0 else [0.0, float(noise_std)]
    rs = np.random.default_rng(seed)
    cov_cache = {}
    rows = []
    residual_rows = []
    for h_true in h_list:
        for noise in noise_levels:
            estimates = {name: [] for name in ESTIMATORS}
            resid_robust = np.zeros(j_e - j_i + 1)
            resid_ml = np.zeros(j_e - j_i + 1)
            for _ in range(replicas):
                seed_path = int(rs.integers(2 ** 63))
                seed_noise = int(rs.integers(2 ** 63))
                series = synth_fbm(GaussianProcessSpec(
                    h_path=h_true, sigma_path=1.0, n=n, seed=seed_path))
                if noise > 0:
                    series = add_white_noise(series, noise, seed_noise)
                window = AnalysisWindow.from_values(series.values)
                spec = scale_spectrum(window, j_i, j_e)
                fit_r = fit_mod.robust_fit(spec)
                fit_l = fit_mod.gls_fit(spec, 1)
                fit_f = fullcov_gls_fit(spec, cov_cache)
                fit_m = ml_fit(window)
                estimates["robust"].append(fit_r.h_hat)
                estimates["gls_linear"].append(fit_l.h_hat)
                estimates["gls_full_covariance"].append(fit_f.h_hat)
                estimates["ml"].append(fit_m.h_hat)
                implied = fit_mod.implied_power_law(
                    fit_m.h_hat, fit_m.sigma_step, spec.j_range)
                resid_robust += fit_mod.per_scale_residual(spec, fit_r)
                resid_ml += fit_mod.per_scale_residual(spec, implied)
            for name in ESTIMATORS:
                vals = np.asarray(estimates[name])
                std = float(vals.std(ddof=1))
                rows.append({
                    "H": h_true, "noise": noise, "estimator": name,
                    "mean_h": float(vals.mean()),
                    "std_h": std,
                    "std_error": std / np.sqrt(replicas),
                    "bias": float(vals.mean() - h_true),
                })
            ratio = resid_robust / resid_ml
            for idx, j in enumerate(range(j_i, j_e + 1)):
                residual_rows.append({
                    "H": h_true, "noise": noise, "scale_steps": 2 * j,
                    "ratio": float(ratio[idx]),
                })
    return rows, residual_rows
