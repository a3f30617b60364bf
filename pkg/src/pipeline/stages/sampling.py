"""Multi-chain sampling stage."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Literal

from loss_ratio_rj.core.model import ModelId, ObservationSeries, PriorConfig
from loss_ratio_rj.errors import ContractError
from loss_ratio_rj.samplers.chain import ChainConfig, ChainRecord
from loss_ratio_rj.samplers.gibbs import default_init, run_gibbs
from loss_ratio_rj.samplers.marginal import RwTuning, run_marginal
from loss_ratio_rj.samplers.proposals import MoveSpec, VanillaProposalSpec
from loss_ratio_rj.samplers.rjmcmc import Scheme, run_rj

from ..pipeline import PipelineResult

logger = logging.getLogger(__name__)

SamplerKind = Literal["gibbs", "marginal", "rj"]


@dataclass(frozen=True, eq=False)
class ChainJob:
    """Everything one worker needs to produce one chain; picklable."""

    kind: SamplerKind
    index: int
    data: ObservationSeries
    priors: PriorConfig
    chain: ChainConfig
    model: ModelId = ModelId.M1
    move_spec: MoveSpec | None = None
    scheme: Scheme = "efficient"
    proposal_spec: VanillaProposalSpec | None = None
    tuning: RwTuning | None = None


def run_chain_job(job: ChainJob) -> ChainRecord:
    if job.kind == "gibbs":
        return run_gibbs(job.model, job.data, job.priors, job.chain)
    if job.kind == "marginal":
        if job.tuning is None:
            msg = "marginal chains need a tuning"
            raise ContractError(msg)
        return run_marginal(job.data, job.priors, job.chain, job.tuning)
    if job.kind == "rj":
        if job.move_spec is None:
            msg = "reversible-jump chains need a move spec"
            raise ContractError(msg)
        # chain k starts in M_{(k mod 3)+1}
        start = default_init(ModelId(job.index % len(ModelId) + 1), job.data)
        return run_rj(
            job.data,
            job.priors,
            job.chain,
            job.move_spec,
            job.scheme,
            job.proposal_spec,
            init=start,
        )
    msg = f"unknown sampler kind {job.kind!r}"
    raise ContractError(msg)


@dataclass
class SamplingStage:
    """Runs ``sampler.chains`` independent chains, in a process pool when ``workers > 1``.

    Chains share nothing but read-only inputs; each has its own spawned seed, so
    the result does not depend on the number of workers.
    """

    kind: SamplerKind
    name: str = "Sampling"
    model: ModelId = ModelId.M1
    workers: int = 1

    def _jobs(self, context: dict[str, Any]) -> list[ChainJob]:
        config = context["config"]
        priors = config.priors()
        return [
            ChainJob(
                kind=self.kind,
                index=k,
                data=context["data"],
                priors=priors,
                chain=config.chain_config(seed),
                model=self.model,
                move_spec=config.move_spec() if self.kind == "rj" else None,
                scheme=config.rj.scheme,
                proposal_spec=context.get("proposal_spec"),
                tuning=context.get("tuning"),
            )
            for k, seed in enumerate(context["seeds"])
        ]

    def run(self, context: dict[str, Any]) -> PipelineResult:
        start_time = time.time()
        errors: list[str] = []
        output: dict[str, Any] = {}

        try:
            jobs = self._jobs(context)
            if self.workers > 1 and len(jobs) > 1:
                with ProcessPoolExecutor(max_workers=min(self.workers, len(jobs))) as pool:
                    chains = list(pool.map(run_chain_job, jobs))
            else:
                chains = [run_chain_job(job) for job in jobs]
            for k, record in enumerate(chains):
                logger.info("chain %d (%s): %d retained draws", k, record.sampler, len(record))
            output["chains"] = chains
            success = True
        except Exception as e:
            logger.exception("Sampling failed")
            errors.append(f"Sampling error: {e}")
            success = False

        return PipelineResult(
            stage_name=self.name,
            success=success,
            duration=time.time() - start_time,
            output=output,
            errors=errors,
            artifacts=[],
        )
