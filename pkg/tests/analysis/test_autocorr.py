"""Tests for autocorrelation and density export curves."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate

from loss_ratio_rj.analysis.autocorr import acf, acf_band, density_curve
from loss_ratio_rj.errors import ContractError


def test_acf_of_ar1_decays_geometrically(rng):
    phi = 0.8
    x = np.empty(50000)
    x[0] = 0.0
    noise = rng.normal(size=x.size)
    for t in range(1, x.size):
        x[t] = phi * x[t - 1] + noise[t]
    values = acf(x, 5)
    assert values[0] == 1.0
    np.testing.assert_allclose(values, phi ** np.arange(6), atol=0.05)


def test_acf_matches_direct_sum(rng):
    x = rng.normal(size=64)
    centred = x - x.mean()
    direct = [np.dot(centred[: 64 - k], centred[k:]) / np.dot(centred, centred) for k in range(4)]
    np.testing.assert_allclose(acf(x, 3), direct, atol=1e-12)


def test_acf_rejects_bad_lag_and_constant_series():
    with pytest.raises(ContractError):
        acf(np.arange(5.0), 5)
    with pytest.raises(ContractError):
        acf(np.ones(10), 2)


def test_band():
    assert acf_band(400) == pytest.approx(0.098)


def test_density_curve_integrates_to_one(rng):
    grid, density = density_curve(rng.normal(size=2000), grid_size=256)
    assert grid.shape == density.shape == (256,)
    assert integrate.trapezoid(density, grid) == pytest.approx(1.0, abs=0.01)


def test_density_curve_ignores_nan_and_needs_spread():
    grid, _ = density_curve(np.array([0.0, np.nan, 1.0, 2.0]), bandwidth=0.5)
    assert grid[0] < 0.0 < 2.0 < grid[-1]
    with pytest.raises(ContractError):
        density_curve(np.array([1.0, 1.0, np.nan]))
