"""Pilot stages: vanilla proposal tuning and marginal random-walk tuning."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Any

from loss_ratio_rj.analysis.summary import summarize_chain
from loss_ratio_rj.samplers.marginal import RwTuning, tune_widths
from loss_ratio_rj.samplers.proposals import VanillaProposalSpec, run_pilots, spec_from_pilots

from ..pipeline import PipelineResult
from ..utils.caching import CacheManager

logger = logging.getLogger(__name__)


def _data_key(context: dict[str, Any]) -> dict[str, Any]:
    config = context["config"]
    return {"data": context["data"].rows(), "priors": config.priors().to_dict()}


@dataclass
class VanillaPilotStage:
    """Runs one Gibbs pilot per model and fits the vanilla jump proposals.

    Per-model pilot summaries go into the context as ``pilot_summaries`` so the
    report stage can write them next to the chains.
    """

    name: str = "Vanilla pilot"
    cache: CacheManager | None = None

    def run(self, context: dict[str, Any]) -> PipelineResult:
        start_time = time.time()
        errors: list[str] = []
        output: dict[str, Any] = {}

        try:
            config = context["config"]
            pilot_config = config.pilot_config()
            level = config.sampler.hpd_level
            key = None
            cached = None
            if self.cache is not None:
                inputs = {**_data_key(context), "pilot": pilot_config.to_dict(), "level": level}
                key = self.cache.get_cache_key("vanilla-pilot", inputs)
                cached = self.cache.get(key)

            if cached is not None:
                logger.info("Using cached pilot spec %s", key)
                spec = VanillaProposalSpec.from_dict(cached["spec"])
                summaries = cached["summaries"]
            else:
                records = run_pilots(context["data"], config.priors(), pilot_config)
                spec = spec_from_pilots(records)
                summaries = {
                    model.label: {n: s.to_dict() for n, s in summarize_chain(rec, level).items()}
                    for model, rec in records.items()
                }
                if self.cache is not None and key is not None:
                    self.cache.set(key, {"spec": spec.to_dict(), "summaries": summaries})

            output["proposal_spec"] = spec
            output["pilot_summaries"] = summaries
            success = True
        except Exception as e:
            logger.exception("Vanilla pilot failed")
            errors.append(f"Pilot error: {e}")
            success = False

        return PipelineResult(
            stage_name=self.name,
            success=success,
            duration=time.time() - start_time,
            output=output,
            errors=errors,
            artifacts=[],
        )


@dataclass
class MarginalTuningStage:
    name: str = "Marginal tuning"
    cache: CacheManager | None = None

    def run(self, context: dict[str, Any]) -> PipelineResult:
        start_time = time.time()
        errors: list[str] = []
        output: dict[str, Any] = {}

        try:
            config = context["config"]
            pilot = config.marginal_pilot()
            key = None
            cached = None
            if self.cache is not None:
                inputs = {**_data_key(context), "pilot": vars(config.marginal), "seed": pilot.seed}
                key = self.cache.get_cache_key("marginal-tuning", inputs)
                cached = self.cache.get(key)

            if cached is not None:
                logger.info("Using cached marginal tuning %s", key)
                tuning = RwTuning.from_dict(cached)
            else:
                tuning = tune_widths(context["data"], config.priors(), pilot)
                if self.cache is not None and key is not None:
                    self.cache.set(key, tuning.to_dict())

            output["tuning"] = tuning
            success = True
        except Exception as e:
            logger.exception("Marginal tuning failed")
            errors.append(f"Tuning error: {e}")
            success = False

        return PipelineResult(
            stage_name=self.name,
            success=success,
            duration=time.time() - start_time,
            output=output,
            errors=errors,
            artifacts=[],
        )
