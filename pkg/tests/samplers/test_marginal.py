"""Tests for the marginal random-walk Metropolis sampler and its tuning."""

from __future__ import annotations

import math
from typing import Any

import numpy as np
import pytest

from loss_ratio_rj.core.model import log_marginal_target
from loss_ratio_rj.errors import ConfigError, ContractError
from loss_ratio_rj.samplers.chain import ChainConfig
from loss_ratio_rj.samplers.marginal import (
    DEFAULT_TARGET_RATES,
    MarginalPilotConfig,
    MarginalState,
    RwTuning,
    WidthAdapter,
    pilot_alpha_covariance,
    run_marginal,
    rw_block_update_alpha,
    rw_scalar_update,
    tune_widths,
)


def _tuning(n: int = 7, width: float = 0.05) -> RwTuning:
    return RwTuning(width, width, width, np.eye(n) * 1e-5)


def test_tuning_validation():
    with pytest.raises(ContractError):
        RwTuning(0.0, 0.1, 0.1, np.eye(2))
    with pytest.raises(ContractError):
        RwTuning(0.1, 0.1, 0.1, np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ContractError):
        RwTuning(0.1, 0.1, 0.1, np.ones((2, 3)))


def test_tuning_from_dict():
    tuning = _tuning(3)
    again = RwTuning.from_dict(tuning.to_dict())
    assert again.width_eta == tuning.width_eta
    np.testing.assert_array_equal(again.alpha_cov, tuning.alpha_cov)
    assert again.target_rates == DEFAULT_TARGET_RATES
    with pytest.raises(ContractError):
        RwTuning.from_dict({"width_rho": 1.0})


def test_state_caches_target(seven_year, priors):
    state = MarginalState.initial(seven_year, priors)
    expected = log_marginal_target(
        state.alpha0, state.alpha, state.rho, state.eta, seven_year, priors
    )
    assert state.log_target == expected
    moved = state.moved(seven_year, priors, rho=0.1)
    assert moved.rho == 0.1
    assert moved.log_target != state.log_target


@pytest.mark.parametrize("which", ["rho", "eta", "alpha0"])
def test_scalar_update_decides_on_recomputed_target(seven_year, priors, which):
    """Each accept/reject matches a from-scratch evaluation of the target difference."""
    tuning = _tuning(width=0.3)
    state = MarginalState.initial(seven_year, priors)
    accepted = 0
    for seed in range(200):
        replay = np.random.default_rng(seed)
        proposal = state.scalar(which) + replay.uniform(-0.3, 0.3)
        values = {"alpha0": state.alpha0, "rho": state.rho, "eta": state.eta, which: proposal}
        fresh = log_marginal_target(
            values["alpha0"], state.alpha, values["rho"], values["eta"], seven_year, priors
        )
        current = log_marginal_target(
            state.alpha0, state.alpha, state.rho, state.eta, seven_year, priors
        )
        take = math.log1p(-replay.random()) < fresh - current
        new, moved = rw_scalar_update(
            which, state, tuning, seven_year, priors, np.random.default_rng(seed)
        )
        assert moved == take
        assert new.scalar(which) == (proposal if take else state.scalar(which))
        assert new.log_target == pytest.approx(
            log_marginal_target(new.alpha0, new.alpha, new.rho, new.eta, seven_year, priors),
            rel=1e-12,
        )
        accepted += moved
        state = new
    assert 0 < accepted < 200


def test_scalar_update_rejects_block_name(seven_year, priors, rng):
    state = MarginalState.initial(seven_year, priors)
    block: Any = "alpha"
    with pytest.raises(ContractError):
        rw_scalar_update(block, state, _tuning(), seven_year, priors, rng)


def test_width_adapter_moves_toward_target():
    adapter = WidthAdapter(_tuning(2), kappa=1.0)
    for _ in range(10):
        adapter.record({"rho": True, "eta": False, "alpha0": True, "alpha": False})
    adapter.end_batch()
    assert adapter.widths["rho"] > 0.05  # always accepted: widen
    assert adapter.widths["eta"] < 0.05  # never accepted: narrow
    assert adapter.alpha_scale < 1.0
    assert adapter.last_rates["alpha0"] == 1.0
    frozen = adapter.freeze()
    np.testing.assert_allclose(frozen.alpha_cov, adapter.alpha_scale**2 * np.eye(2) * 1e-5)


def test_width_adapter_rejects_negative_gain():
    with pytest.raises(ConfigError):
        WidthAdapter(_tuning(2), kappa=-1.0)


def test_pilot_config_validation():
    with pytest.raises(ConfigError):
        MarginalPilotConfig(batch_size=0)
    with pytest.raises(ConfigError):
        MarginalPilotConfig(target_rates={"rho": 0.3})


def test_rank_deficient_covariance_falls_back(caplog: pytest.LogCaptureFixture):
    trace = np.column_stack([np.arange(10.0), np.arange(10.0)])
    cov, fallback = pilot_alpha_covariance(trace)
    assert fallback
    assert np.count_nonzero(cov - np.diag(np.diag(cov))) == 0
    assert "rank deficient" in caplog.text


def test_run_marginal_leaves_precisions_empty(seven_year, priors):
    record = run_marginal(seven_year, priors, ChainConfig(iterations=300, burn_in=100), _tuning())
    assert len(record) == 200
    assert np.all(np.isnan(record.column("sigma")))
    assert np.all(np.isnan(record.column("tau")))
    assert not np.any(np.isnan(record.column("rho")))
    rates = record.meta["acceptance_rates"]
    assert set(rates) == {"rho", "eta", "alpha0", "alpha"}
    assert all(0.0 <= r <= 1.0 for r in rates.values())


def test_run_marginal_checks_dimensions(seven_year, priors):
    with pytest.raises(ContractError):
        run_marginal(seven_year, priors, ChainConfig(iterations=10), _tuning(3))


def test_tune_widths_is_reproducible(seven_year, priors):
    cfg = MarginalPilotConfig(gibbs_iterations=400, gibbs_burn_in=100, batches=4, batch_size=25)
    a = tune_widths(seven_year, priors, cfg)
    b = tune_widths(seven_year, priors, cfg)
    assert a.to_dict() == b.to_dict()
    assert a.alpha_cov.shape == (7, 7)
    assert all(math.isfinite(a.width(name)) for name in ("rho", "eta", "alpha0"))


@pytest.mark.slow
def test_marginal_agrees_with_gibbs(seven_year, informative_priors):
    """Both samplers target the same M1 posterior in (alpha0, alpha, rho, eta)."""
    from loss_ratio_rj.analysis.summary import summarize_parameter
    from loss_ratio_rj.core.model import ModelId
    from loss_ratio_rj.samplers.gibbs import run_gibbs

    tuning = tune_widths(seven_year, informative_priors, MarginalPilotConfig(seed=1))
    marginal = run_marginal(
        seven_year, informative_priors, ChainConfig(iterations=60000, burn_in=5000, seed=2), tuning
    )
    gibbs = run_gibbs(
        ModelId.M1,
        seven_year,
        informative_priors,
        ChainConfig(iterations=60000, burn_in=5000, seed=3),
    )
    for name in ("rho", "eta", "alpha4"):
        a = summarize_parameter(name, marginal.column(name))
        b = summarize_parameter(name, gibbs.column(name))
        assert a.mean == pytest.approx(b.mean, abs=5.0 * math.hypot(a.mcse, b.mcse) + 1e-3)


def test_block_update_moves_only_alpha(seven_year, priors, rng):
    state = MarginalState.initial(seven_year, priors)
    tiny = RwTuning(0.1, 0.1, 0.1, np.eye(seven_year.n) * 1e-24)
    moved, accepted = rw_block_update_alpha(state, tiny, seven_year, priors, rng)
    assert accepted
    assert not np.array_equal(moved.alpha, state.alpha)
    assert (moved.rho, moved.eta, moved.alpha0) == (state.rho, state.eta, state.alpha0)
    huge = RwTuning(0.1, 0.1, 0.1, np.eye(seven_year.n) * 1e6)
    kept, accepted = rw_block_update_alpha(state, huge, seven_year, priors, rng)
    assert not accepted
    assert kept is state
