"""Continuous-transform Haar details, scale spectra, and cross-scale correlation.

A detail coefficient at scale j is the difference of two adjacent block
sums of length j, normalized by sqrt(2j), evaluated at every offset of the
window. The scale spectrum is the per-scale mean square of those
coefficients; its log-log slope carries the local Hurst exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .series import AnalysisWindow
from .validation import as_float_vector, as_positive_int, require


@dataclass(frozen=True)
class ScaleSpectrum:
    """Mean-square detail energies S_j with sample counts N_j.

    j_range     inclusive scale index pair (j_i, j_e)
    s_values    S_j for j = j_i..j_e
    counts      N_j = Meff - 2j + 1
    window_meta (effective window length Meff, center index n0)
    """

    j_range: tuple
    s_values: np.ndarray
    counts: np.ndarray
    window_meta: tuple

    def __post_init__(self):
        j_lo, j_hi = (int(self.j_range[0]), int(self.j_range[1]))
        require(1 <= j_lo <= j_hi, "scale range must satisfy 1 <= j_i <= j_e")
        object.__setattr__(self, "j_range", (j_lo, j_hi))
        s = as_float_vector(self.s_values, "s_values", min_len=1)
        require(s.size == j_hi - j_lo + 1, "s_values length must match j_range")
        require(bool(np.all(s >= 0)), "spectrum values must be >= 0")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "s_values", s)
        counts = np.asarray(self.counts, dtype=int).copy()
        require(counts.size == s.size, "counts length must match j_range")
        require(bool(np.all(counts >= 1)), "every scale needs at least one sample")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "window_meta",
                           (int(self.window_meta[0]), int(self.window_meta[1])))

    @property
    def scales(self):
        return np.arange(self.j_range[0], self.j_range[1] + 1)

    @property
    def log2_scale_axis(self):
        """Design axis log2(2j): a scale-j coefficient spans 2j samples."""
        return np.log2(2.0 * self.scales)


@dataclass(frozen=True)
class CrossSpectrum:
    """Per-scale correlation rho_j between two windows; NaN marks missing."""

    j_range: tuple
    rho: np.ndarray

    def __post_init__(self):
        rho = as_float_vector(self.rho, "rho", min_len=1, allow_nan=True)
        finite = rho[np.isfinite(rho)]
        require(bool(np.all(np.abs(finite) <= 1.0 + 1e-12)),
                "correlations must lie in [-1, 1]")
        rho = rho.copy()
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "j_range",
                           (int(self.j_range[0]), int(self.j_range[1])))


def _window_values(window):
    if isinstance(window, AnalysisWindow):
        return window.q, window.effective_m, window.center_index
    q = as_float_vector(window, "window", min_len=2)
    return q, q.size, max(1, q.size // 2)


def haar_details(window, j):
    """Detail coefficients d_j(i), i = 1..N_j, N_j = Meff - 2j + 1.

    d_j(i) = sum_{k=0}^{j-1} (q_{k+i} - q_{k+i+j}) / sqrt(2j)
    """
    q, m_eff, _ = _window_values(window)
    j = as_positive_int(j, "j", minimum=1)
    require(j <= m_eff // 2,
            f"scale j={j} out of range 1..{m_eff // 2} for window length {m_eff}")
    # center at q_1 so constant windows cancel exactly in the prefix sums
    q = q - q[0]
    csum = np.concatenate([[0.0], np.cumsum(q)])
    block = csum[j:] - csum[:-j]          # block[i] = q_i + ... + q_{i+j-1}
    return (block[:m_eff - 2 * j + 1] - block[j:]) / math.sqrt(2.0 * j)


def scale_spectrum(window, j_i=1, j_e=None):
    """Mean-square detail energy per scale over j = j_i..j_e.

    j_e defaults to floor(Meff / 2), the largest admissible scale.
    """
    q, m_eff, n0 = _window_values(window)
    j_i = as_positive_int(j_i, "j_i", minimum=1)
    if j_e is None:
        j_e = m_eff // 2
    j_e = as_positive_int(j_e, "j_e", minimum=1)
    require(j_i <= j_e <= m_eff // 2,
            f"invalid scale range [{j_i}, {j_e}] for window length {m_eff}")
    scales = np.arange(j_i, j_e + 1)
    s_values = np.empty(scales.size)
    counts = np.empty(scales.size, dtype=int)
    # center at q_1 so constant windows cancel exactly in the prefix sums
    csum = np.concatenate([[0.0], np.cumsum(q - q[0])])
    for idx, j in enumerate(scales):
        block = csum[j:] - csum[:-j]
        d = (block[:m_eff - 2 * j + 1] - block[j:]) / math.sqrt(2.0 * j)
        s_values[idx] = np.mean(d * d)
        counts[idx] = d.size
    return ScaleSpectrum(
        j_range=(j_i, int(j_e)),
        s_values=s_values,
        counts=counts,
        window_meta=(m_eff, n0),
    )


def cross_scale_correlation(window_a, window_b, j_i=1, j_e=None):
    """Pearson correlation of paired detail coefficients per scale.

    Both windows must have the same effective length. A scale where either
    side has zero variance (or a single sample) yields NaN, never 0.
    """
    qa, ma, _ = _window_values(window_a)
    qb, mb, _ = _window_values(window_b)
    require(ma == mb, f"windows must have equal length, got {ma} and {mb}")
    j_i = as_positive_int(j_i, "j_i", minimum=1)
    if j_e is None:
        j_e = ma // 2
    j_e = as_positive_int(j_e, "j_e", minimum=1)
    require(j_i <= j_e <= ma // 2,
            f"invalid scale range [{j_i}, {j_e}] for window length {ma}")
    rho = np.empty(j_e - j_i + 1)
    for idx, j in enumerate(range(j_i, j_e + 1)):
        da = haar_details(qa, j)
        db = haar_details(qb, j)
        if da.size < 2:
            rho[idx] = np.nan
            continue
        da = da - da.mean()
        db = db - db.mean()
        denom = math.sqrt(float(da @ da) * float(db @ db))
        rho[idx] = (da @ db) / denom if denom > 0 else np.nan
    return CrossSpectrum(j_range=(j_i, int(j_e)), rho=rho)
