"""Thin scikit-learn style wrappers around the functional API.

These exist so the estimators drop into sklearn pipelines and parameter
searches (get_params/set_params/clone); all numerical work stays in the
fit, mle and rolling modules.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .fit import annualize, fixed_h_fit, gls_fit, robust_fit
from .mle import ml_fit
from .rolling import rolling_estimates
from .series import AnalysisWindow, SampledSeries
from .spectrum import scale_spectrum
from .validation import as_float_vector


def _values_1d(x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    return as_float_vector(arr, "X", min_len=2)


class SpectralHurst(BaseEstimator):
    """Hurst/volatility point estimate from one window's scale spectrum.

    weighting: "robust" (max of linear and cubic weightings), "linear",
    "cubic", or "fixed" (slope pinned at 2*H0 + 1, intercept only).
    fit(X) treats X as a single log-price window.
    """

    def __init__(self, weighting="robust", j_i=1, j_e=None, H0=0.5,
                 steps_per_year=252):
        self.weighting = weighting
        self.j_i = j_i
        self.j_e = j_e
        self.H0 = H0
        self.steps_per_year = steps_per_year

    def fit(self, X, y=None):
        values = _values_1d(X)
        window = AnalysisWindow.from_values(values)
        spectrum = scale_spectrum(window, self.j_i, self.j_e)
        if self.weighting == "robust":
            result = robust_fit(spectrum)
        elif self.weighting == "linear":
            result = gls_fit(spectrum, 1)
        elif self.weighting == "cubic":
            result = gls_fit(spectrum, 3)
        elif self.weighting == "fixed":
            result = fixed_h_fit(spectrum, self.H0)
        else:
            raise ValueError(f"unknown weighting {self.weighting!r}")
        self.h_ = result.h_hat
        self.sigma_step_ = result.sigma_step
        self.sigma_annual_ = annualize(result.sigma_step, result.h_hat,
                                       self.steps_per_year)
        self.c_ = result.c_hat
        self.p_ = result.p_hat
        self.misfit_ = result.misfit
        self.branch_ = result.branch
        self.spectrum_ = spectrum
        return self


class MaximumLikelihoodHurst(BaseEstimator):
    """Gaussian ML estimate of (H, sigma) from one window's increments."""

    def __init__(self, steps_per_year=252):
        self.steps_per_year = steps_per_year

    def fit(self, X, y=None):
        values = _values_1d(X)
        result = ml_fit(values)
        self.h_ = result.h_hat
        self.sigma_step_ = result.sigma_step
        self.sigma_annual_ = annualize(result.sigma_step, result.h_hat,
                                       self.steps_per_year)
        self.log_likelihood_ = result.log_likelihood
        return self


class RollingHurst(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping a log-price series to its parameter
    track: transform(X) returns an (N, 3) array of columns
    (H, sigma_annual, misfit), one row per center time.
    """

    def __init__(self, M=256, weighting="robust", j_i=1, j_e=None, H0=0.5,
                 steps_per_year=252):
        self.M = M
        self.weighting = weighting
        self.j_i = j_i
        self.j_e = j_e
        self.H0 = H0
        self.steps_per_year = steps_per_year

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        values = _values_1d(X)
        series = SampledSeries(values=values, kind="log_price")
        mode = "fixed_h" if self.weighting == "fixed" else "robust"
        if self.weighting not in ("robust", "fixed"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        track = rolling_estimates(series, self.M, j_i=self.j_i, j_e=self.j_e,
                                  mode=mode, h0=self.H0,
                                  steps_per_year=self.steps_per_year)
        return np.column_stack([track.h_track, track.sigma_annual_track,
                                track.misfit_track])
