"""Tests for posterior summaries."""

from __future__ import annotations

import math

import numpy as np
import pytest

from loss_ratio_rj.analysis.summary import (
    batch_means_mcse,
    model_averaged_summary,
    summarize_chain,
    summarize_parameter,
    variance_scale_summary,
)
from loss_ratio_rj.core.model import ModelId
from loss_ratio_rj.errors import ContractError
from loss_ratio_rj.samplers.chain import ChainConfig, ChainRecorder


def test_mcse_of_iid_draws(rng):
    x = rng.normal(size=40000)
    assert batch_means_mcse(x) == pytest.approx(1.0 / 200.0, rel=0.2)
    assert math.isnan(batch_means_mcse(np.ones(3)))


def test_parameter_summary(rng):
    summary = summarize_parameter("eta", rng.normal(2.0, 0.5, 10000))
    assert summary.mean == pytest.approx(2.0, abs=0.03)
    assert summary.sd == pytest.approx(0.5, abs=0.02)
    assert summary.hpd_lower < 2.0 < summary.hpd_upper
    payload = summary.to_dict()
    assert payload["count"] == 10000
    with pytest.raises(ContractError):
        summarize_parameter("eta", np.array([np.nan]))


def _mixed_chain(states):
    seq = [states[ModelId.M1]] * 3 + [states[ModelId.M3]] * 5
    recorder = ChainRecorder(7, ChainConfig(iterations=len(seq)), sampler="rj-test")
    for it, state in enumerate(seq, start=1):
        recorder.offer(it, state)
    return recorder.finish()


def test_summarize_chain_skips_absent_columns(states):
    chain = _mixed_chain(states).select(ModelId.M3)
    summaries = summarize_chain(chain)
    assert "alpha0" not in summaries
    assert "rho" not in summaries
    assert summaries["eta"].count == 5


def test_variance_scale_inverts_precisions(states):
    out = variance_scale_summary(_mixed_chain(states))
    assert out["sigma_variance"].mean == pytest.approx(1.0 / 900.0)
    assert out["tau_variance"].mean == pytest.approx(1.0 / 1200.0)


def test_model_averaged_summary_pools_carrying_models(states):
    chain = _mixed_chain(states)
    result = model_averaged_summary(chain)
    assert result.weights[ModelId.M1] == pytest.approx(3 / 8)
    assert set(result.by_model) == {ModelId.M1, ModelId.M3}
    # eta of M1 (0.05) three times and of M3 (0.052) five times
    assert result.overall["eta"].count == 8
    assert result.overall["eta"].mean == pytest.approx((3 * 0.05 + 5 * 0.052) / 8)
    assert result.overall["alpha0"].count == 3
    payload = result.to_dict()
    assert payload["weights"]["m2"] == 0.0
    assert "m2" not in payload["by_model"]
