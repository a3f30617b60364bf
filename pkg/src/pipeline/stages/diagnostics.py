"""Posterior summaries and convergence diagnostics over finished chains."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Any

import numpy as np

from loss_ratio_rj.analysis.autocorr import acf, acf_band, density_curve
from loss_ratio_rj.analysis.convergence import (
    DiagnosticTrace,
    chisq_convergence,
    default_checkpoints,
    ks_convergence,
)
from loss_ratio_rj.analysis.summary import (
    model_averaged_summary,
    summarize_chain,
    variance_scale_summary,
)
from loss_ratio_rj.errors import ContractError
from loss_ratio_rj.samplers.chain import ChainRecord
from loss_ratio_rj.samplers.rjmcmc import (
    MoveStats,
    empirical_transition_matrix,
    pooled_model_probabilities,
    pooled_transition_matrix,
    transition_matrix_to_dict,
)

from ..pipeline import PipelineResult

logger = logging.getLogger(__name__)


def acf_table(
    chain: ChainRecord, max_lag: int, *, with_model: bool
) -> list[tuple[str, int, float, float]]:
    """Long-format ``(parameter, lag, acf, band)`` rows for every fully observed column."""
    rows: list[tuple[str, int, float, float]] = []
    band = acf_band(len(chain))
    series: list[tuple[str, np.ndarray]] = []
    if with_model:
        series.append(("model", chain.models.astype(float)))
    series.extend((name, chain.column(name)) for name in chain.columns)
    lags = min(max_lag, len(chain) - 1)
    for name, values in series:
        if np.any(np.isnan(values)):
            continue
        try:
            curve = acf(values, lags)
        except ContractError:
            logger.warning("no autocorrelation for constant series %s", name)
            continue
        rows.extend((name, lag, float(v), band) for lag, v in enumerate(curve))
    return rows


def convergence_traces(
    chains: list[ChainRecord], every: int, ks_params: list[str]
) -> list[DiagnosticTrace]:
    """Chi-square and KS traces on the model indicator, plus KS on each named parameter."""
    checkpoints = default_checkpoints(min(len(c) for c in chains), every)
    models = [c.models for c in chains]
    traces = [
        chisq_convergence(models, checkpoints),
        ks_convergence([m.astype(float) for m in models], checkpoints, "model"),
    ]
    for name in ks_params:
        traces.append(ks_convergence([c.column(name) for c in chains], checkpoints, name))
    return traces


@dataclass
class DiagnosticsStage:
    """Builds summary.json content, ACF and density tables and multi-chain diagnostics.

    ``kind`` is the sampler that produced the chains; ``diagnose`` skips the
    posterior summaries and recomputes only the convergence outputs.
    """

    kind: str
    name: str = "Diagnostics"

    def run(self, context: dict[str, Any]) -> PipelineResult:
        start_time = time.time()
        errors: list[str] = []
        output: dict[str, Any] = {}

        try:
            config = context["config"]
            chains: list[ChainRecord] = context["chains"]
            if not chains or any(len(c) == 0 for c in chains):
                msg = "every chain needs at least one retained draw"
                raise ContractError(msg)
            level = config.sampler.hpd_level
            trans_dimensional = self.kind in {"rj", "diagnose"}
            pooled = ChainRecord.concatenate(chains)
            summary: dict[str, Any] = {
                "command": self.kind,
                "n": pooled.n,
                "chains": [
                    {"index": k, "sampler": c.sampler, "seed": c.seed, "draws": len(c), **c.meta}
                    for k, c in enumerate(chains)
                ],
            }

            if self.kind in {"gibbs", "marginal"}:
                summary["parameters"] = {
                    n: s.to_dict() for n, s in summarize_chain(pooled, level).items()
                }
                summary["variance_scale"] = {
                    n: s.to_dict() for n, s in variance_scale_summary(pooled, level).items()
                }
            if self.kind == "rj":
                averaged = model_averaged_summary(pooled, level)
                summary["model_averaged"] = averaged.to_dict()
                summary["variance_scale"] = {
                    n: s.to_dict() for n, s in variance_scale_summary(pooled, level).items()
                }
                moves = MoveStats()
                for c in chains:
                    chain_moves = MoveStats.from_dict(c.meta["moves"], int(c.meta["iterations"]))
                    moves = moves.merge(chain_moves)
                summary["moves"] = moves.to_dict()
                if moves.fallbacks:
                    logger.warning(
                        "efficient proposal fell back to the diagonal form %d times",
                        moves.fallbacks,
                    )
            if trans_dimensional:
                summary["model_probabilities"] = {
                    m.label: p for m, p in pooled_model_probabilities(chains).items()
                }
                if len(pooled) >= 2:  # noqa: PLR2004
                    output["transition"] = {
                        "pooled": transition_matrix_to_dict(pooled_transition_matrix(chains)),
                        "chains": [
                            transition_matrix_to_dict(empirical_transition_matrix(c))
                            for c in chains
                            if len(c) >= 2  # noqa: PLR2004
                        ],
                    }
            if "tuning" in context:
                summary["tuning"] = context["tuning"].to_dict()

            if self.kind != "diagnose":
                output["acf_table"] = acf_table(
                    chains[0], config.sampler.max_lag, with_model=trans_dimensional
                )
                densities: dict[str, tuple[np.ndarray, np.ndarray]] = {}
                for param in config.sampler.density_params:
                    try:
                        densities[param] = density_curve(pooled.column(param))
                    except (KeyError, ContractError) as e:
                        logger.warning("skipping density of %s: %s", param, e)
                output["densities"] = densities

            if trans_dimensional and len(chains) >= 2:  # noqa: PLR2004
                output["traces"] = convergence_traces(
                    chains, config.sampler.checkpoint_every, config.rj.ks_params
                )
                summary["convergence"] = {
                    t.test: {"final_statistic": t.statistics[-1], "final_pvalue": t.pvalues[-1]}
                    for t in output["traces"]
                }

            output["summary"] = summary
            success = True
        except Exception as e:
            logger.exception("Diagnostics failed")
            errors.append(f"Diagnostics error: {e}")
            success = False

        return PipelineResult(
            stage_name=self.name,
            success=success,
            duration=time.time() - start_time,
            output=output,
            errors=errors,
            artifacts=[],
        )
