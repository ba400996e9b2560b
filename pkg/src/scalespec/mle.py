"""Exact Gaussian maximum likelihood for constant-H windows.

Models the first differences of a log-price window as fractional Gaussian
noise and maximizes the profiled likelihood over H. The Toeplitz structure
is exploited throughout: the quadratic form goes through a Levinson solve
and the log-determinant through a Durbin recursion, so no dense covariance
matrix is ever formed or inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_toeplitz

from .series import AnalysisWindow
from .synth import fgn_covariance
from .validation import as_float_vector, check_open_unit, require

_H_GRID = np.linspace(0.05, 0.95, 21)
_GOLDEN_TOL = 1e-4


@dataclass(frozen=True)
class MLFit:
    """Maximum-likelihood point estimate for one window.

    h_hat           maximizing Hurst exponent
    sigma_step      profiled per-step volatility at h_hat
    log_likelihood  maximized Gaussian log-likelihood of the increments
    """

    h_hat: float
    sigma_step: float
    log_likelihood: float


def _durbin_logdet(gamma):
    """log det of the Toeplitz covariance with first row gamma, via Durbin.

    Runs the standard forward recursion on prediction-error variances; the
    log-determinant is the sum of their logs. Raises if the sequence is not
    positive definite.
    """
    n = gamma.size
    require(gamma[0] > 0, "covariance not positive definite")
    logdet = math.log(gamma[0])
    if n == 1:
        return logdet
    phi = np.empty(n - 1)
    phi[0] = gamma[1] / gamma[0]
    v = gamma[0] * (1.0 - phi[0] ** 2)
    if v <= 0:
        raise ValueError("covariance not positive definite")
    logdet += math.log(v)
    for k in range(2, n):
        ref = (gamma[k] - phi[:k - 1] @ gamma[k - 1:0:-1]) / v
        phi[:k - 1] -= ref * phi[k - 2::-1]
        phi[k - 1] = ref
        v *= 1.0 - ref * ref
        if v <= 0:
            raise ValueError("covariance not positive definite")
        logdet += math.log(v)
    return logdet


@lru_cache(maxsize=4096)
def _unit_logdet(h, n):
    # unit-variance fGn; depends only on (H, n) so it is shared across
    # windows and replicas of equal length
    gamma = fgn_covariance(h, 1.0, np.arange(n))
    return _durbin_logdet(gamma)


def fgn_negloglik(x, h):
    """Profiled negative log-likelihood of increments x under fGn(H).

    Returns (value, profiled_sigma) where profiled_sigma is the per-step
    volatility that minimizes the likelihood at this H, and value is the
    negative log-likelihood at that sigma:

        value = 0.5 * (n log 2 pi + n log sigma^2 + log det R + n)

    with R the unit-variance fGn correlation matrix. A numerically
    indefinite solve yields (inf, nan) rather than an exception so grid
    searches can skip the point.
    """
    x = as_float_vector(x, "x", min_len=8)
    h = check_open_unit(h, "H")
    n = x.size
    gamma = fgn_covariance(h, 1.0, np.arange(n))
    try:
        sol = solve_toeplitz((gamma, gamma), x)
        logdet = _unit_logdet(h, n)
    except (np.linalg.LinAlgError, ValueError):
        return math.inf, math.nan
    quad = float(x @ sol)
    if not quad > 0:
        return math.inf, math.nan
    sigma_sq = quad / n
    value = 0.5 * (n * math.log(2.0 * math.pi) + n * math.log(sigma_sq)
                   + logdet + n)
    return value, math.sqrt(sigma_sq)


def _golden_minimize(func, lo, hi, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = func(c), func(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = func(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = func(d)
    return (c, fc) if fc <= fd else (d, fd)


def ml_fit(window):
    """Maximize the fGn likelihood of a window's first differences over H.

    Accepts an AnalysisWindow or a raw log-price vector of length >= 16.
    A coarse 21-point grid over [0.05, 0.95] brackets the optimum and a
    golden-section refinement narrows it below 1e-4 in H.
    """
    if isinstance(window, AnalysisWindow):
        values = window.q
    else:
        values = as_float_vector(window, "window", min_len=2)
    require(values.size >= 16,
            f"ml_fit needs an effective window of at least 16 values, "
            f"got {values.size}")
    x = np.diff(values)

    grid_vals = [fgn_negloglik(x, h)[0] for h in _H_GRID]
    finite = [i for i, v in enumerate(grid_vals) if math.isfinite(v)]
    require(bool(finite), "likelihood is non-finite across the whole H grid")
    best = min(finite, key=lambda i: grid_vals[i])
    lo = _H_GRID[max(best - 1, 0)]
    hi = _H_GRID[min(best + 1, _H_GRID.size - 1)]
    h_ref, f_ref = _golden_minimize(lambda h: fgn_negloglik(x, h)[0],
                                    float(lo), float(hi), _GOLDEN_TOL)
    h_hat = h_ref if f_ref <= grid_vals[best] else float(_H_GRID[best])
    value, sigma = fgn_negloglik(x, h_hat)
    return MLFit(h_hat=float(h_hat), sigma_step=float(sigma),
                 log_likelihood=-float(value))
