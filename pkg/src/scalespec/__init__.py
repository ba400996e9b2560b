"""Local power-law structure of time series.

Estimates a Hurst exponent H and volatility sigma, globally or on rolling
windows, from continuous-transform Haar scale spectra with robust weighted
regression; ships exact fBm / approximate mBm synthesis for validation, a
Gaussian ML baseline, and a CLI.
"""

from .bench import bench_estimators, fullcov_gls_fit, log_spectrum_covariance
from .estimators import MaximumLikelihoodHurst, RollingHurst, SpectralHurst
from .fit import (PowerLawFit, annualize, clamp_h, deannualize, fixed_h_fit,
                  gls_fit, h_scaling, implied_power_law, per_scale_residual,
                  robust_fit, spectral_misfit)
from .mle import MLFit, fgn_negloglik, ml_fit
from .rolling import ParameterTrack, Variogram, rolling_estimates, variogram
from .series import (AnalysisWindow, SampledSeries, ingest_csv, log_transform,
                     returns, serialize_csv, window_bounds, window_slice)
from .spectrum import (CrossSpectrum, ScaleSpectrum, cross_scale_correlation,
                       haar_details, scale_spectrum)
from .synth import (GaussianProcessSpec, add_white_noise, c_normalization,
                    fgn_covariance, sample_fgn, synth_fbm, synth_mbm)

__version__ = "0.1.0"

__all__ = [
    "AnalysisWindow", "CrossSpectrum", "GaussianProcessSpec",
    "MaximumLikelihoodHurst", "MLFit", "ParameterTrack", "PowerLawFit",
    "RollingHurst", "SampledSeries", "ScaleSpectrum", "SpectralHurst",
    "Variogram", "add_white_noise", "annualize", "bench_estimators",
    "c_normalization", "clamp_h", "cross_scale_correlation", "deannualize",
    "fgn_covariance", "fgn_negloglik", "fixed_h_fit", "fullcov_gls_fit",
    "gls_fit", "h_scaling", "haar_details", "implied_power_law",
    "ingest_csv", "log_spectrum_covariance", "log_transform", "ml_fit",
    "per_scale_residual", "returns", "robust_fit", "rolling_estimates",
    "sample_fgn", "scale_spectrum", "serialize_csv", "spectral_misfit",
    "synth_fbm", "synth_mbm", "variogram", "window_bounds", "window_slice",
]
