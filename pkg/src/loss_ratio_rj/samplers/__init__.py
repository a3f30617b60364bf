"""Gibbs, marginal Metropolis and reversible-jump samplers."""

from .chain import ChainConfig, ChainRecord
from .gibbs import run_gibbs
from .marginal import RwTuning, run_marginal, tune_widths
from .proposals import MoveSpec, VanillaProposalSpec, pilot_tune
from .rjmcmc import run_rj

__all__ = [
    "ChainConfig",
    "ChainRecord",
    "MoveSpec",
    "RwTuning",
    "VanillaProposalSpec",
    "pilot_tune",
    "run_gibbs",
    "run_marginal",
    "run_rj",
    "tune_widths",
]
