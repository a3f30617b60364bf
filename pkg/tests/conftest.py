"""Shared fixtures: a seven-year loss-ratio series, priors and states of each model."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from loss_ratio_rj.core.model import (
    ModelId,
    ObservationSeries,
    ParamState,
    PriorConfig,
    load_series,
)

EXPOSURES = (0.8, 1.1, 1.5, 0.9, 1.3, 1.7, 1.2)
RATIOS = (0.031, 0.055, 0.042, 0.068, 0.047, 0.059, 0.072)


@pytest.fixture
def seven_year() -> ObservationSeries:
    rows = [(1988 + j, r * e, e) for j, (r, e) in enumerate(zip(RATIOS, EXPOSURES, strict=True))]
    return load_series(rows)


@pytest.fixture
def priors() -> PriorConfig:
    return PriorConfig()


@pytest.fixture
def informative_priors() -> PriorConfig:
    """Gamma(2, 0.002) on both precisions: prior mean 1000, tails a grid can hold."""
    return PriorConfig(a1=2.0, b1=0.002, a2=2.0, b2=0.002)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture
def m1_state(seven_year: ObservationSeries) -> ParamState:
    return ParamState.for_model(
        ModelId.M1,
        np.asarray(RATIOS) + 0.002,
        alpha0=0.04,
        rho=0.3,
        eta=0.05,
        sigma=900.0,
        tau=1200.0,
    )


@pytest.fixture
def states(m1_state: ParamState) -> dict[ModelId, ParamState]:
    """One state per model sharing alpha, sigma and tau."""
    shared = {"sigma": m1_state.sigma, "tau": m1_state.tau}
    return {
        ModelId.M1: m1_state,
        ModelId.M2: ParamState.for_model(ModelId.M2, m1_state.alpha, alpha0=0.035, **shared),
        ModelId.M3: ParamState.for_model(ModelId.M3, m1_state.alpha, eta=0.052, **shared),
    }


@pytest.fixture
def data_csv(tmp_path: Path, seven_year: ObservationSeries) -> Path:
    return seven_year.to_csv(tmp_path / "losses.csv")
