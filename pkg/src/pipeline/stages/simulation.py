"""Synthetic data stages: one simulated dataset, or a whole recovery study."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from loss_ratio_rj.core.model import ModelId
from loss_ratio_rj.synthetic import (
    RecoveryFitConfig,
    SimulationSpec,
    default_exposures,
    draw_from_prior,
    recovery_study,
    simulate_with_truth,
    truth_to_dict,
)

from ..pipeline import PipelineResult
from ..utils.reporting import ArtifactWriter

logger = logging.getLogger(__name__)


def simulation_spec(config: Any) -> SimulationSpec:
    """The preset named in the config, or parameters drawn from the prior."""
    sim = config.simulation
    seed = config.sampler.seed
    if not sim.from_prior:
        return SimulationSpec.from_preset(sim.preset, seed)
    model = ModelId.from_label(sim.sim_model)
    exposure_seq, prior_seq = np.random.SeedSequence(seed).spawn(2)
    exposures = default_exposures(sim.sim_n, 1.0, np.random.default_rng(exposure_seq))
    truth = draw_from_prior(model, sim.sim_n, config.priors(), np.random.default_rng(prior_seq))
    return SimulationSpec(model, truth, exposures, seed)


@dataclass
class SimulateStage:
    writer: ArtifactWriter
    name: str = "Simulate"

    def run(self, context: dict[str, Any]) -> PipelineResult:
        start_time = time.time()
        errors: list[str] = []
        artifacts: list[Path] = []

        try:
            spec = simulation_spec(context["config"])
            data, truth = simulate_with_truth(spec)
            artifacts.append(self.writer.adopt(data.to_csv(self.writer.staging_dir / "data.csv")))
            artifacts.append(self.writer.write_json("truth.json", truth_to_dict(truth, spec)))
            logger.info("simulated %d rows from %s", data.n, spec.model.name)
            success = True
        except Exception as e:
            logger.exception("Simulation failed")
            errors.append(f"Simulation error: {e}")
            success = False

        return PipelineResult(
            stage_name=self.name,
            success=success,
            duration=time.time() - start_time,
            output={},
            errors=errors,
            artifacts=artifacts,
        )


@dataclass
class RecoveryStage:
    """Repeated simulate-and-fit runs scored on model choice and HPD coverage."""

    writer: ArtifactWriter
    name: str = "Recovery study"
    workers: int = 1

    def run(self, context: dict[str, Any]) -> PipelineResult:
        start_time = time.time()
        errors: list[str] = []
        artifacts: list[Path] = []

        try:
            config = context["config"]
            spec = simulation_spec(config)
            fit = RecoveryFitConfig(
                chain=config.chain_config(0),
                priors=config.priors(),
                move_spec=config.move_spec(),
                scheme=config.rj.scheme,
                pilot=config.pilot_config(),
                level=config.sampler.hpd_level,
            )
            report = recovery_study(
                spec.model,
                spec.true_params,
                config.simulation.replications,
                fit,
                exposures=spec.exposures,
                seed=config.sampler.seed,
                workers=self.workers,
            )
            artifacts.append(self.writer.write_json("recovery.json", report.to_dict()))
            success = True
        except Exception as e:
            logger.exception("Recovery study failed")
            errors.append(f"Recovery error: {e}")
            success = False

        return PipelineResult(
            stage_name=self.name,
            success=success,
            duration=time.time() - start_time,
            output={},
            errors=errors,
            artifacts=artifacts,
        )
