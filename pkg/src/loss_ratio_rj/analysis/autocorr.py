"""Sample autocorrelation and kernel density curves for trace export."""

from __future__ import annotations

import math

import numpy as np
from scipy import fft, stats

from loss_ratio_rj.errors import ContractError


def acf(samples: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased-normalisation sample ACF for lags 0..max_lag, computed by FFT."""
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if not 0 <= max_lag < n:
        msg = f"max_lag must lie in [0, {n}), got {max_lag}"
        raise ContractError(msg)
    centred = x - x.mean()
    size = fft.next_fast_len(2 * n)
    spectrum = fft.rfft(centred, size)
    cov = fft.irfft(spectrum * np.conjugate(spectrum), size)[: max_lag + 1] / n
    if not cov[0] > 0:
        msg = "autocorrelation is undefined for a constant series"
        raise ContractError(msg)
    out = cov / cov[0]
    out[0] = 1.0
    return out


def acf_band(n: int) -> float:
    """Half-width of the approximate 95% band for white noise."""
    return 1.96 / math.sqrt(n)


def density_curve(
    samples: np.ndarray, grid_size: int = 512, bandwidth: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian KDE evaluated on an even grid covering the draws."""
    x = np.asarray(samples, dtype=float).ravel()
    x = x[~np.isnan(x)]
    spread = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    if spread == 0.0:
        msg = "density needs at least two distinct draws"
        raise ContractError(msg)
    bw = "scott" if bandwidth is None or bandwidth <= 0 else bandwidth / spread
    kde = stats.gaussian_kde(x, bw_method=bw)
    h = float(np.sqrt(kde.covariance[0, 0]))
    grid = np.linspace(x.min() - 3.0 * h, x.max() + 3.0 * h, grid_size)
    return grid, kde(grid)
