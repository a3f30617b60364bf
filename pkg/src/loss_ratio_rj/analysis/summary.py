"""Posterior summaries per parameter, per model and model-averaged."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from loss_ratio_rj.analysis.hpd import hpd_shortest
from loss_ratio_rj.core.model import ModelId
from loss_ratio_rj.errors import ContractError
from loss_ratio_rj.samplers.chain import ChainRecord

logger = logging.getLogger(__name__)

_MIN_BATCHES = 2


def batch_means_mcse(values: np.ndarray) -> float:
    """Monte Carlo standard error of the mean from floor(sqrt(N)) batch means."""
    x = np.asarray(values, dtype=float)
    batches = int(math.isqrt(x.size))
    if batches < _MIN_BATCHES:
        return math.nan
    size = x.size // batches
    means = x[: batches * size].reshape(batches, size).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(batches))


@dataclass(frozen=True)
class ParameterSummary:
    name: str
    count: int
    mean: float
    sd: float
    mcse: float
    hpd_lower: float
    hpd_upper: float
    level: float = 0.95

    def to_dict(self) -> dict[str, Any]:
        return {
            "count": self.count,
            "mean": self.mean,
            "sd": self.sd,
            "mcse": None if math.isnan(self.mcse) else self.mcse,
            "hpd": [self.hpd_lower, self.hpd_upper],
            "level": self.level,
        }


def summarize_parameter(name: str, values: np.ndarray, level: float = 0.95) -> ParameterSummary:
    x = np.asarray(values, dtype=float)
    x = x[~np.isnan(x)]
    if x.size == 0:
        msg = f"no draws of {name}"
        raise ContractError(msg)
    hpd = hpd_shortest(x, level)
    return ParameterSummary(
        name=name,
        count=int(x.size),
        mean=float(x.mean()),
        sd=float(x.std(ddof=1)) if x.size > 1 else 0.0,
        mcse=batch_means_mcse(x),
        hpd_lower=hpd.lower,
        hpd_upper=hpd.upper,
        level=level,
    )


def summarize_chain(chain: ChainRecord, level: float = 0.95) -> dict[str, ParameterSummary]:
    """Summaries of every parameter with at least one draw."""
    out: dict[str, ParameterSummary] = {}
    for name in chain.columns:
        column = chain.column(name)
        if np.all(np.isnan(column)):
            continue
        out[name] = summarize_parameter(name, column, level)
    return out


def variance_scale_summary(chain: ChainRecord, level: float = 0.95) -> dict[str, ParameterSummary]:
    """sigma and tau are precisions; summarise 1/sigma and 1/tau as error variances."""
    out: dict[str, ParameterSummary] = {}
    for name in ("sigma", "tau"):
        column = chain.column(name)
        if np.all(np.isnan(column)):
            continue
        out[f"{name}_variance"] = summarize_parameter(f"{name}_variance", 1.0 / column, level)
    return out


@dataclass
class ModelAveragedSummary:
    weights: dict[ModelId, float]
    overall: dict[str, ParameterSummary] = field(default_factory=dict)
    by_model: dict[ModelId, dict[str, ParameterSummary]] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "weights": {m.label: w for m, w in self.weights.items()},
            "overall": {k: s.to_dict() for k, s in self.overall.items()},
            "by_model": {
                m.label: {k: s.to_dict() for k, s in summaries.items()}
                for m, summaries in self.by_model.items()
            },
            "notes": list(self.notes),
        }


def model_averaged_summary(chain: ChainRecord, level: float = 0.95) -> ModelAveragedSummary:
    """Per-model conditional summaries and the visit-weighted mixture.

    Draws of a parameter from every model carrying it are pooled, which weights
    each model's conditional law by its visit frequency.
    """
    if len(chain) == 0:
        msg = "chain is empty"
        raise ContractError(msg)
    weights = chain.model_probabilities()
    result = ModelAveragedSummary(weights=weights)
    for model in ModelId:
        if weights[model] > 0:
            result.by_model[model] = summarize_chain(chain.select(model), level)
    for name in chain.columns:
        column = chain.column(name)
        if np.all(np.isnan(column)):
            result.notes.append(f"{name} is absent from every visited model")
            continue
        result.overall[name] = summarize_parameter(name, column, level)
    return result
