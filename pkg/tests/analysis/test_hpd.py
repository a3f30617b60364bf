"""Tests for HPD intervals and regions."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from loss_ratio_rj.analysis.hpd import HpdResult, hpd_kde_region, hpd_shortest
from loss_ratio_rj.errors import ContractError


def test_shortest_interval_of_normal_draws(rng):
    draws = rng.normal(0.0, 1.0, 40000)
    result = hpd_shortest(draws, 0.95)
    assert result.lower == pytest.approx(-1.96, abs=0.05)
    assert result.upper == pytest.approx(1.96, abs=0.05)
    assert result.coverage >= 0.95


def test_shortest_interval_is_shortest_for_skewed_law(rng):
    draws = rng.gamma(2.0, 1.0, 40000)
    result = hpd_shortest(draws, 0.9)
    central = np.quantile(draws, [0.05, 0.95])
    assert result.upper - result.lower < central[1] - central[0]
    # equal density at both ends
    pdf = stats.gamma(2.0).pdf
    assert pdf(result.lower) == pytest.approx(pdf(result.upper), rel=0.25)


def test_shortest_interval_ties_go_left():
    result = hpd_shortest(np.array([0.0, 1.0, 2.0, 3.0]), 0.5)
    assert result.intervals == ((0.0, 2.0),)


def test_too_few_draws_returns_whole_range(caplog: pytest.LogCaptureFixture):
    result = hpd_shortest(np.array([1.0, 2.0]), 0.99)
    assert result.intervals == ((1.0, 2.0),)
    assert "whole range" in caplog.text


def test_nan_draws_are_ignored():
    result = hpd_shortest(np.array([np.nan, 1.0, 2.0, 3.0, np.nan]), 0.5)
    assert result.lower >= 1.0


@pytest.mark.parametrize("level", [0.0, 1.0, 1.2])
def test_level_must_be_open_unit(level):
    with pytest.raises(ContractError):
        hpd_shortest(np.ones(5), level)


def test_empty_draws_rejected():
    with pytest.raises(ContractError):
        hpd_shortest(np.array([np.nan]))


def test_kde_region_splits_bimodal_draws(rng):
    draws = np.concatenate([rng.normal(-4.0, 0.5, 5000), rng.normal(4.0, 0.5, 5000)])
    result = hpd_kde_region(draws, 0.9)
    assert len(result.intervals) == 2
    assert not result.contains(0.0)
    assert result.contains(-4.0)
    assert result.contains(4.0)
    assert result.coverage >= 0.9


def test_kde_region_of_constant_draws():
    result = hpd_kde_region(np.full(10, 3.0))
    assert result.intervals == ((3.0, 3.0),)


def test_result_validates_ordering():
    with pytest.raises(ContractError):
        HpdResult(0.9, ((2.0, 3.0), (0.0, 1.0)), "kde_threshold")
    assert HpdResult(0.9, ((0.0, 1.0),), "shortest_interval").to_dict()["intervals"] == [[0.0, 1.0]]
