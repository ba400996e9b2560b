"""Ground-truth Gaussian generators used as estimation oracles.

Fractional Gaussian noise / fractional Brownian motion are produced by
circulant embedding of the increment covariance, which is exact in
distribution. Paths with time-varying parameters come from a discretized
harmonizable spectral integral and are approximate, with documented grid
defaults. All generators are deterministic functions of (spec, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .series import SampledSeries
from .validation import as_positive_int, check_open_unit, require

# relative tolerance below which a negative embedding eigenvalue is treated
# as rounding noise rather than a genuine failure
_EMBED_TOL = 1e-8


@dataclass(frozen=True)
class GaussianProcessSpec:
    """Synthesis recipe: Hurst and volatility paths, length, seed.

    h_path and sigma_path may be scalars (constant-parameter process) or
    length-n vectors. Hurst values must lie strictly inside (0, 1);
    volatilities must be >= 0 (the varying-parameter generator accepts 0,
    the constant-parameter fBm generator requires > 0).
    """

    h_path: float | np.ndarray
    sigma_path: float | np.ndarray
    n: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "n", as_positive_int(self.n, "n", minimum=2))
        h = np.atleast_1d(np.asarray(self.h_path, dtype=float))
        s = np.atleast_1d(np.asarray(self.sigma_path, dtype=float))
        require(h.size in (1, self.n), "h_path must be scalar or length n")
        require(s.size in (1, self.n), "sigma_path must be scalar or length n")
        require(bool(np.all((h > 0) & (h < 1))),
                "Hurst values must lie strictly between 0 and 1")
        require(bool(np.all(s >= 0)), "volatilities must be >= 0")

    def h_values(self):
        h = np.atleast_1d(np.asarray(self.h_path, dtype=float))
        return np.full(self.n, h[0]) if h.size == 1 else h.copy()

    def sigma_values(self):
        s = np.atleast_1d(np.asarray(self.sigma_path, dtype=float))
        return np.full(self.n, s[0]) if s.size == 1 else s.copy()

    @property
    def constant(self):
        return (np.asarray(self.h_path).size == 1
                and np.asarray(self.sigma_path).size == 1)


def fgn_covariance(h, sigma, lag):
    """Autocovariance of unit-step fBm increments at the given lag(s).

    gamma(k) = (sigma^2 / 2) (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})
    """
    h = check_open_unit(h, "H")
    sigma = float(sigma)
    require(sigma > 0, "sigma must be > 0")
    k = np.asarray(lag, dtype=float)
    require(bool(np.all(k >= 0)), "lag must be >= 0")
    require(bool(np.all(k == np.floor(k))), "lag must be an integer")
    two_h = 2.0 * h
    gam = 0.5 * sigma ** 2 * (np.abs(k + 1) ** two_h
                              - 2.0 * np.abs(k) ** two_h
                              + np.abs(k - 1) ** two_h)
    return float(gam) if np.isscalar(lag) or np.asarray(lag).ndim == 0 else gam


def _covariance_vector(h, sigma, max_lag):
    return fgn_covariance(h, sigma, np.arange(max_lag + 1))


def sample_fgn(h, sigma, m, rng, size=None, method="auto"):
    """Draw stationary fractional Gaussian noise of length m.

    method "circulant" embeds the m+1 covariances in a circulant of size
    2m and filters white noise through its eigenvalue square roots, exact
    whenever the embedding spectrum is nonnegative; "dense" factorizes the
    Toeplitz covariance directly; "auto" tries circulant and falls back.
    size=None yields a 1-d draw, otherwise shape (size, m).
    """
    h = check_open_unit(h, "H")
    sigma = float(sigma)
    require(sigma > 0, "sigma must be > 0")
    m = as_positive_int(m, "m", minimum=1)
    n_draws = 1 if size is None else as_positive_int(size, "size", minimum=1)
    if m == 1:
        out = sigma * rng.standard_normal((n_draws, 1))
        return out[0] if size is None else out

    if method not in ("auto", "circulant", "dense"):
        raise ValueError(f"unknown sampling method {method!r}")
    gam = _covariance_vector(h, sigma, m)
    if method in ("auto", "circulant"):
        first_row = np.concatenate([gam, gam[m - 1:0:-1]])
        lam = np.fft.fft(first_row).real
        if lam.min() >= -_EMBED_TOL * lam.max():
            lam = np.clip(lam, 0.0, None)
            z = np.empty((n_draws, 2 * m), dtype=complex)
            z[:, 0] = rng.standard_normal(n_draws)
            z[:, m] = rng.standard_normal(n_draws)
            v1 = rng.standard_normal((n_draws, m - 1))
            v2 = rng.standard_normal((n_draws, m - 1))
            z[:, 1:m] = (v1 + 1j * v2) / math.sqrt(2.0)
            z[:, m + 1:] = np.conj(z[:, m - 1:0:-1])
            out = math.sqrt(2 * m) * np.fft.ifft(np.sqrt(lam) * z, axis=1).real[:, :m]
            return out[0] if size is None else out
        if method == "circulant":
            raise ValueError("circulant embedding spectrum has negative values")

    # dense route: direct factorization of the Toeplitz covariance
    idx = np.abs(np.subtract.outer(np.arange(m), np.arange(m)))
    cov = gam[idx]
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * gam[0]
        try:
            chol = np.linalg.cholesky(cov + jitter * np.eye(m))
        except np.linalg.LinAlgError:
            raise ValueError(
                "increment covariance is numerically non-positive-definite") from None
    out = rng.standard_normal((n_draws, m)) @ chol.T
    return out[0] if size is None else out


def synth_fbm(spec, method="auto"):
    """Exact fractional Brownian motion path for a constant-parameter spec.

    Returns n values with B(0) = 0 and n-1 stationary fGn increments;
    bit-identical for identical (spec, seed).
    """
    require(spec.constant, "synth_fbm requires constant h_path and sigma_path")
    h = float(np.asarray(spec.h_path).ravel()[0])
    sigma = float(np.asarray(spec.sigma_path).ravel()[0])
    require(sigma > 0, "synth_fbm requires sigma > 0")
    rng = np.random.default_rng(spec.seed)
    inc = sample_fgn(h, sigma, spec.n - 1, rng, method=method)
    path = np.concatenate([[0.0], np.cumsum(inc)])
    return SampledSeries(values=path, kind="log_price")


def c_normalization(h):
    """Normalization C(h) = pi / (h Gamma(2h) sin(pi h)).

    Equals the integral of 4 sin^2(u/2) |u|^(-1-2h) over the real line,
    which makes the harmonizable representation have unit-step variance
    sigma^2.
    """
    h = check_open_unit(h, "h")
    return math.pi / (h * math.gamma(2.0 * h) * math.sin(math.pi * h))


def _c_normalization_array(h):
    h = np.asarray(h, dtype=float)
    return np.pi / (h * special.gamma(2.0 * h) * np.sin(np.pi * h))


def _catmull_rom_weights(t):
    t2 = t * t
    t3 = t2 * t
    w0 = -0.5 * t3 + t2 - 0.5 * t
    w1 = 1.5 * t3 - 2.5 * t2 + 1.0
    w2 = -1.5 * t3 + 2.0 * t2 + 0.5 * t
    w3 = 0.5 * t3 - 0.5 * t2
    return w0, w1, w2, w3


_H_GRID_STEP = 0.01


def synth_mbm(spec, freq_grid_size=2 ** 16, freq_cutoff=None):
    """Approximate path with time-varying H_t, sigma_t via a spectral sum.

    Discretizes Re{ integral of (e^{-i u k} - 1) |u|^{-1/2 - H_k} dW(u) }
    on a symmetric midpoint grid of freq_grid_size points up to the cutoff
    (default pi * n after rescaling frequencies to per-step units), with
    one shared complex Gaussian draw across all times, scaled by
    sigma_k / sqrt(C(H_k)). The |u|^{-1/2-H} sum is evaluated per H on a
    0.01-step grid by chirp-z transform and interpolated cubically in H.
    """
    from scipy.signal import czt

    n = spec.n
    k_total = as_positive_int(freq_grid_size, "freq_grid_size", minimum=2)
    require(k_total >= 2 ** 12, f"frequency grid too coarse: K={k_total} < 2^12")
    require(k_total >= 4 * n,
            f"frequency grid too small for series length: K={k_total} < 4n={4 * n}")
    require(k_total % 2 == 0, "freq_grid_size must be even (symmetric grid)")
    xi = math.pi * n if freq_cutoff is None else float(freq_cutoff)
    require(xi > 0, "freq_cutoff must be > 0")

    h_path = spec.h_values()
    sigma_path = spec.sigma_values()

    k_half = k_total // 2
    # per-step frequency variable: u = xi_physical / n, midpoint grid
    xi_step = xi / n
    du = xi_step / k_half
    u = (np.arange(k_half) + 0.5) * du

    rng = np.random.default_rng(spec.seed)
    z_pos = rng.standard_normal(k_half) + 1j * rng.standard_normal(k_half)
    z_neg = rng.standard_normal(k_half) + 1j * rng.standard_normal(k_half)

    # H grid with two spare nodes on each side for the cubic stencil
    i_lo = math.floor(h_path.min() / _H_GRID_STEP) - 1
    i_hi = math.floor(h_path.max() / _H_GRID_STEP) + 2
    nodes = np.arange(i_lo, i_hi + 1) * _H_GRID_STEP

    w = np.exp(-1j * du)
    phase = np.exp(-0.5j * du * np.arange(n))
    node_curves = np.empty((nodes.size, n))
    for g, h_node in enumerate(nodes):
        amp = u ** (-0.5 - h_node)
        pos = czt(amp * z_pos, m=n, w=w) * phase
        neg = np.conj(czt(amp * np.conj(z_neg), m=n, w=w) * phase)
        # the "-1" part of (e^{-iuk} - 1) is constant in k
        offset = np.sum(amp * z_pos) + np.sum(amp * z_neg)
        node_curves[g] = (pos + neg - offset).real

    pos_frac = (h_path - nodes[0]) / _H_GRID_STEP
    base = np.clip(np.floor(pos_frac).astype(int), 1, nodes.size - 3)
    t = pos_frac - base
    w0, w1, w2, w3 = _catmull_rom_weights(t)
    cols = np.arange(n)
    interp = (w0 * node_curves[base - 1, cols]
              + w1 * node_curves[base, cols]
              + w2 * node_curves[base + 1, cols]
              + w3 * node_curves[base + 2, cols])

    scale = sigma_path / np.sqrt(_c_normalization_array(h_path))
    values = scale * math.sqrt(du) * interp
    return SampledSeries(values=values, kind="log_price")


def add_white_noise(series, noise_std, seed):
    """Add iid centered Gaussian noise of the given std to every value."""
    noise_std = float(noise_std)
    require(noise_std >= 0, "noise_std must be >= 0")
    rng = np.random.default_rng(seed)
    noisy = series.values + noise_std * rng.standard_normal(len(series))
    return SampledSeries(
        values=noisy,
        start_index=series.start_index,
        dates=series.dates,
        kind=series.kind,
    )
