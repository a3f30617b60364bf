"""loss-ratio-rj package."""

from __future__ import annotations

from .core.model import ModelId, ObservationSeries, ParamState, PriorConfig, load_series
from .errors import ConfigError, ContractError, DataError, LossRatioError

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ContractError",
    "DataError",
    "LossRatioError",
    "ModelId",
    "ObservationSeries",
    "ParamState",
    "PriorConfig",
    "load_series",
]
