"""Pipeline stages package."""

from .diagnostics import DiagnosticsStage
from .pilot import MarginalTuningStage, VanillaPilotStage
from .report import ReportStage
from .sampling import ChainJob, SamplingStage, run_chain_job
from .simulation import RecoveryStage, SimulateStage

__all__ = [
    "ChainJob",
    "DiagnosticsStage",
    "MarginalTuningStage",
    "RecoveryStage",
    "ReportStage",
    "SamplingStage",
    "SimulateStage",
    "VanillaPilotStage",
    "run_chain_job",
]
