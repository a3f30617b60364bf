"""Tests for ChainConfig, ChainRecorder and ChainRecord."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from loss_ratio_rj.core.model import ModelId
from loss_ratio_rj.errors import ConfigError, DataError
from loss_ratio_rj.samplers.chain import ChainConfig, ChainRecord, ChainRecorder


@pytest.mark.parametrize(
    "kwargs",
    [
        {"iterations": 0},
        {"iterations": 10, "burn_in": 10},
        {"iterations": 10, "burn_in": -1},
        {"iterations": 10, "thin": 0},
        {"iterations": 10, "seed": -1},
        {"iterations": 10, "seed": 2**64},
    ],
)
def test_chain_config_rejects(kwargs):
    with pytest.raises(ConfigError):
        ChainConfig(**kwargs)


def test_keeps_matches_retained():
    cfg = ChainConfig(iterations=23, burn_in=5, thin=4)
    kept = [it for it in range(1, 24) if cfg.keeps(it)]
    assert kept == [9, 13, 17, 21]
    assert cfg.retained == len(kept)


def _record(states) -> ChainRecord:
    cfg = ChainConfig(iterations=len(states))
    recorder = ChainRecorder(states[0].n, cfg, sampler="test")
    for it, state in enumerate(states, start=1):
        recorder.offer(it, state)
    return recorder.finish({"note": "x"})


def test_recorder_leaves_absent_parameters_nan(states):
    record = _record([states[ModelId.M1], states[ModelId.M2], states[ModelId.M3]])
    assert record.models.tolist() == [1, 2, 3]
    assert math.isnan(record.column("eta")[1])
    assert math.isnan(record.column("alpha0")[2])
    assert math.isnan(record.column("rho")[1])
    assert math.isnan(record.column("rho")[2])
    assert record.column("sigma").tolist() == [900.0] * 3
    assert record.meta == {"note": "x"}


def test_snapshot_restores_state(states):
    record = _record([states[ModelId.M3]])
    again = record.snapshot(0)
    assert again.model is ModelId.M3
    assert again.eta == states[ModelId.M3].eta
    assert again.alpha0 is None
    assert again.shares_with(states[ModelId.M3])


def test_select_and_model_probabilities(states):
    seq = [states[ModelId.M1]] * 2 + [states[ModelId.M3]] * 6
    record = _record(seq)
    probs = record.model_probabilities()
    assert probs == {ModelId.M1: 0.25, ModelId.M2: 0.0, ModelId.M3: 0.75}
    assert len(record.select(ModelId.M3)) == 6
    assert len(record.select(ModelId.M2)) == 0


def test_csv_round_trip_keeps_bits_and_gaps(tmp_path: Path, states):
    record = _record([states[ModelId.M2], states[ModelId.M1]])
    path = record.to_csv(tmp_path / "chain.csv")
    header, first, _ = path.read_text(encoding="utf-8").splitlines()
    assert header.startswith("iteration,model,alpha0,alpha1")
    assert ",," in first  # M2 rows have no rho or eta
    again = ChainRecord.from_csv(path)
    np.testing.assert_array_equal(again.values, record.values)
    np.testing.assert_array_equal(again.models, record.models)


def test_from_csv_rejects_foreign_header(tmp_path: Path):
    path = tmp_path / "other.csv"
    path.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
    with pytest.raises(DataError):
        ChainRecord.from_csv(path)


def test_concatenate(states):
    a = _record([states[ModelId.M1]])
    b = _record([states[ModelId.M2], states[ModelId.M2]])
    both = ChainRecord.concatenate([a, b])
    assert len(both) == 3
    assert both.models.tolist() == [1, 2, 2]
    with pytest.raises(ValueError, match="nothing"):
        ChainRecord.concatenate([])
