"""Run orchestration for loss-ratio-rj.

A command is a short, fixed sequence of stages (pilot tuning, sampling,
diagnostics, reporting) that share one context and stop at the first failure.
"""

__version__ = "0.1.0"

from .pipeline import Pipeline, PipelineResult
from .stages import (
    DiagnosticsStage,
    MarginalTuningStage,
    RecoveryStage,
    ReportStage,
    SamplingStage,
    SimulateStage,
    VanillaPilotStage,
)

__all__ = [
    "DiagnosticsStage",
    "MarginalTuningStage",
    "Pipeline",
    "PipelineResult",
    "RecoveryStage",
    "ReportStage",
    "SamplingStage",
    "SimulateStage",
    "VanillaPilotStage",
]
