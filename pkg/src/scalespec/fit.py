"""Weighted log-log regression of scale spectra and volatility annualization.

The spectrum of an H-self-similar process is affine in log2 scale with
slope 2H + 1 and intercept log2(sigma^2 h(H)). Free fits solve a 2x2
weighted normal system; the robust rule takes the larger Hurst estimate of
two weightings, which defends against additive measurement noise floors
that drag the small-scale slope down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .validation import check_open_unit, require

H_MIN = 0.05
H_MAX = 0.95


@dataclass(frozen=True)
class PowerLawFit:
    """Regression output in log2 units.

    c_hat      intercept
    p_hat      slope (2H + 1 for a clean power law)
    h_hat      Hurst estimate, clamped to [0.05, 0.95] except when imposed
    sigma_step per-step volatility 2^(c/2) / sqrt(h(h_hat))
    misfit     unweighted RMS of log2 residuals over the fitted range
    branch     "linear_weight", "cubic_weight", "fixed_h", or "full_covariance"
    j_range    scale range the fit was produced from
    """

    c_hat: float
    p_hat: float
    h_hat: float
    sigma_step: float
    misfit: float
    branch: str
    j_range: tuple


def h_scaling(h):
    """Spectral gain h(H) = (1 - 2^(-2H)) / ((2H + 2)(2H + 1)).

    Relates the power-law intercept to volatility: E S_j ~ sigma^2 h(H)
    (2j)^(2H+1) for large scales. h(1/2) = 1/12.
    """
    arr = np.asarray(h, dtype=float)
    require(bool(np.all((arr > 0) & (arr < 1))),
            "H must lie strictly between 0 and 1")
    out = (1.0 - 2.0 ** (-2.0 * arr)) / ((2.0 * arr + 2.0) * (2.0 * arr + 1.0))
    return float(out) if arr.ndim == 0 else out


def clamp_h(raw):
    return min(max(raw, H_MIN), H_MAX)


def _check_spectrum(spectrum):
    j_lo, j_hi = spectrum.j_range
    s = spectrum.s_values
    require(bool(np.all(s > 0)), "degenerate spectrum")
    require(j_hi > j_lo,
            "scale range must contain at least two scales (normal equations "
            "are singular for j_e = j_i)")
    return np.log2(s), spectrum.log2_scale_axis


def _weighted_line(x, y, w):
    sw = w.sum()
    sx = w @ x
    sxx = w @ (x * x)
    sy = w @ y
    sxy = w @ (x * y)
    det = sw * sxx - sx * sx
    require(det > 0, "singular normal equations")
    p = (sw * sxy - sx * sy) / det
    c = (sxx * sy - sx * sxy) / det
    return c, p


def _finish(c, p, h_hat, y, x, j_range, branch):
    sigma = 2.0 ** (0.5 * c) / math.sqrt(h_scaling(h_hat))
    resid = y - c - p * x
    misfit = math.sqrt(float(np.mean(resid * resid)))
    return PowerLawFit(c_hat=float(c), p_hat=float(p), h_hat=float(h_hat),
                       sigma_step=float(sigma), misfit=misfit,
                       branch=branch, j_range=j_range)


def gls_fit(spectrum, weight_exponent=1):
    """Weighted affine fit of log2 S_j on log2(2j), weights 1/j^q.

    weight_exponent q is 1 (branch linear_weight) or 3 (cubic_weight); the
    weighting matrix is diagonal with entries j^q and enters the normal
    equations inverted, so small scales, which hold most samples, dominate.
    Hurst estimate (p - 1)/2 is clamped to [0.05, 0.95] before the
    volatility back-out so sigma stays finite.
    """
    require(weight_exponent in (1, 3), "weight_exponent must be 1 or 3")
    y, x = _check_spectrum(spectrum)
    j = spectrum.scales.astype(float)
    w = 1.0 / j ** weight_exponent
    c, p = _weighted_line(x, y, w)
    h_hat = clamp_h(0.5 * (p - 1.0))
    branch = "linear_weight" if weight_exponent == 1 else "cubic_weight"
    return _finish(c, p, h_hat, y, x, spectrum.j_range, branch)


def robust_fit(spectrum):
    """Max-of-two-weightings rule: the larger Hurst estimate wins.

    Computes the q=1 and q=3 fits and returns the branch with the larger
    clamped h_hat (tie goes to linear_weight), keeping c, sigma, and misfit
    internally consistent with the winning branch.
    """
    fit_linear = gls_fit(spectrum, weight_exponent=1)
    fit_cubic = gls_fit(spectrum, weight_exponent=3)
    return fit_cubic if fit_cubic.h_hat > fit_linear.h_hat else fit_linear


def fixed_h_fit(spectrum, h0):
    """Intercept-only fit with the slope pinned at 2*h0 + 1.

    Uses q=1 weights like the default free branch; h_hat is the imposed
    value (not clamped) and sigma follows from the fitted intercept.
    """
    h0 = check_open_unit(h0, "H0")
    y, x = _check_spectrum(spectrum)
    j = spectrum.scales.astype(float)
    w = 1.0 / j
    p0 = 2.0 * h0 + 1.0
    c = float(w @ (y - p0 * x) / w.sum())
    return _finish(c, p0, h0, y, x, spectrum.j_range, "fixed_h")


def implied_power_law(h_hat, sigma_step, j_range, branch="implied"):
    """Line implied by an (H, sigma) pair: p = 2H + 1, c = log2(sigma^2 h(H)).

    Lets non-spectral fits (the ML baseline) be compared against spectra
    through the same residual machinery. misfit is not defined here.
    """
    h_for_gain = min(max(float(h_hat), 1e-6), 1.0 - 1e-6)
    c = math.log2(float(sigma_step) ** 2 * h_scaling(h_for_gain))
    p = 2.0 * float(h_hat) + 1.0
    return PowerLawFit(c_hat=c, p_hat=p, h_hat=float(h_hat),
                       sigma_step=float(sigma_step), misfit=float("nan"),
                       branch=branch, j_range=(int(j_range[0]), int(j_range[1])))


def _residuals(spectrum, fit):
    require(tuple(fit.j_range) == tuple(spectrum.j_range),
            f"scale range mismatch: fit {tuple(fit.j_range)} vs "
            f"spectrum {tuple(spectrum.j_range)}")
    y = np.log2(spectrum.s_values)
    x = spectrum.log2_scale_axis
    return y - fit.c_hat - fit.p_hat * x


def spectral_misfit(spectrum, fit):
    """Unweighted RMS of log2 residuals of the fit over its scale range."""
    resid = _residuals(spectrum, fit)
    return math.sqrt(float(np.mean(resid * resid)))


def per_scale_residual(spectrum, fit):
    """Squared log2 residual at each scale of the fitted range."""
    resid = _residuals(spectrum, fit)
    return resid * resid


def annualize(sigma_step, h, steps_per_year=252):
    """Scale per-step volatility to a horizon of m steps: sigma * m^H."""
    m = float(steps_per_year)
    require(m >= 1, "steps_per_year must be >= 1")
    require(0.0 <= float(h) <= 1.0, "H must lie in [0, 1]")
    return float(sigma_step) * m ** float(h)


def deannualize(sigma_annual, h, steps_per_year=252):
    """Inverse of annualize: per-step volatility from a horizon figure."""
    m = float(steps_per_year)
    require(m >= 1, "steps_per_year must be >= 1")
    require(0.0 <= float(h) <= 1.0, "H must lie in [0, 1]")
    return float(sigma_annual) / m ** float(h)
