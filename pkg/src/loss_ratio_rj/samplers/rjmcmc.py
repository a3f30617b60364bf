"""Reversible jump over M1, M2 and M3 with within-model Gibbs updates."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from loss_ratio_rj.core.model import ModelId, ObservationSeries, ParamState, PriorConfig, log_joint
from loss_ratio_rj.errors import ContractError
from loss_ratio_rj.samplers.chain import ChainConfig, ChainRecord, ChainRecorder
from loss_ratio_rj.samplers.gibbs import default_init, gibbs_sweep
from loss_ratio_rj.samplers.proposals import (
    OWN_COORDINATES,
    EfficientFamily,
    MoveSpec,
    ProposalFamily,
    VanillaProposalSpec,
)

logger = logging.getLogger(__name__)

Scheme = Literal["vanilla", "efficient"]


@dataclass(frozen=True)
class JumpEvent:
    source: ModelId
    target: ModelId
    accepted: bool
    log_accept: float
    fallback_used: bool = False


@dataclass(frozen=True, eq=False)
class JumpProposal:
    candidate: ParamState
    log_q_forward: float
    log_q_reverse: float
    fallback_used: bool


@dataclass
class MoveStats:
    """Attempts and acceptances for each ordered move, plus efficient-fallback counts."""

    attempts: np.ndarray = field(default_factory=lambda: np.zeros((3, 3), dtype=np.int64))
    accepts: np.ndarray = field(default_factory=lambda: np.zeros((3, 3), dtype=np.int64))
    fallbacks: int = 0
    iterations: int = 0

    def record(self, event: JumpEvent | None) -> None:
        self.iterations += 1
        if event is None:
            return
        i, j = int(event.source) - 1, int(event.target) - 1
        self.attempts[i, j] += 1
        self.accepts[i, j] += int(event.accepted)
        self.fallbacks += int(event.fallback_used)

    def merge(self, other: MoveStats) -> MoveStats:
        return MoveStats(
            self.attempts + other.attempts,
            self.accepts + other.accepts,
            self.fallbacks + other.fallbacks,
            self.iterations + other.iterations,
        )

    def rate(self, source: ModelId, target: ModelId) -> float:
        i, j = int(source) - 1, int(target) - 1
        tried = int(self.attempts[i, j])
        return float(self.accepts[i, j]) / tried if tried else math.nan

    def to_dict(self) -> dict[str, Any]:
        moves = {}
        for src in ModelId:
            for dst in ModelId:
                if src is dst:
                    continue
                i, j = int(src) - 1, int(dst) - 1
                rate = self.rate(src, dst)
                moves[f"{src.label}->{dst.label}"] = {
                    "attempts": int(self.attempts[i, j]),
                    "accepts": int(self.accepts[i, j]),
                    "rate": None if math.isnan(rate) else rate,
                }
        m1_attempts = int(self.attempts[0].sum() + self.attempts[:, 0].sum())
        return {
            "moves": moves,
            "fallbacks": self.fallbacks,
            "fallback_frequency": self.fallbacks / m1_attempts if m1_attempts else 0.0,
            "fallback_period": self.iterations / self.fallbacks if self.fallbacks else None,
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any], iterations: int = 0) -> MoveStats:
        stats = cls(iterations=iterations, fallbacks=int(payload.get("fallbacks", 0)))
        for key, entry in payload.get("moves", {}).items():
            src, dst = (ModelId.from_label(p) for p in key.split("->"))
            stats.attempts[int(src) - 1, int(dst) - 1] = entry["attempts"]
            stats.accepts[int(src) - 1, int(dst) - 1] = entry["accepts"]
        return stats


def jump_log_accept(
    source: ParamState,
    target: ParamState,
    q_forward_logpdf: float,
    q_reverse_logpdf: float,
    move: tuple[ModelId, ModelId],
    move_spec: MoveSpec,
    data: ObservationSeries,
    priors: PriorConfig,
) -> float:
    """log A for ``source -> target``; identity maps, so no Jacobian."""
    i, j = (ModelId(m) for m in move)
    if source.model is not i or target.model is not j:
        states = f"{source.model.name}->{target.model.name}"
        msg = f"move {i.name}->{j.name} does not match states {states}"
        raise ContractError(msg)
    if not source.shares_with(target):
        msg = "alpha, sigma and tau must be carried over unchanged by a jump"
        raise ContractError(msg)
    gain = log_joint(target, data, priors) - log_joint(source, data, priors)
    if math.isnan(gain) or move_spec.prob(j, i) == 0.0:
        return -math.inf
    return (
        gain
        + math.log(move_spec.prob(j, i))
        - math.log(move_spec.prob(i, j))
        + q_reverse_logpdf
        - q_forward_logpdf
    )


def own_values(state: ParamState) -> np.ndarray:
    vals = state.values()
    return np.array([vals[name] for name in OWN_COORDINATES[state.model]], dtype=float)


def propose_jump(
    state: ParamState, target: ModelId, family: ProposalFamily, rng: np.random.Generator
) -> JumpProposal:
    """Draw the target's own coordinates; score the discarded ones under the reverse law."""
    target = ModelId(target)
    if target is state.model:
        msg = f"jump target equals current model {target.name}"
        raise ContractError(msg)
    forward = family.law(target, state.model, state.alpha, state.tau)
    reverse = family.law(state.model, target, state.alpha, state.tau)
    drawn = forward.sample(rng)
    candidate = ParamState.for_model(
        target,
        state.alpha,
        sigma=state.sigma,
        tau=state.tau,
        **dict(zip(OWN_COORDINATES[target], (float(v) for v in drawn), strict=True)),
    )
    return JumpProposal(
        candidate=candidate,
        log_q_forward=forward.logpdf(drawn),
        log_q_reverse=reverse.logpdf(own_values(state)),
        fallback_used=forward.fallback_used or reverse.fallback_used,
    )


def vanilla_jump(
    state: ParamState,
    target: ModelId,
    spec: VanillaProposalSpec,
    rng: np.random.Generator,
    data: ObservationSeries,
    priors: PriorConfig,
    move_spec: MoveSpec | None = None,
) -> tuple[ParamState, float]:
    move_spec = move_spec or MoveSpec()
    proposal = propose_jump(state, target, spec, rng)
    log_accept = jump_log_accept(
        state,
        proposal.candidate,
        proposal.log_q_forward,
        proposal.log_q_reverse,
        (state.model, ModelId(target)),
        move_spec,
        data,
        priors,
    )
    return proposal.candidate, log_accept


def proposal_family(scheme: Scheme, spec: VanillaProposalSpec | None = None) -> ProposalFamily:
    if scheme == "vanilla":
        if spec is None:
            msg = "the vanilla scheme needs a pilot-tuned proposal spec"
            raise ContractError(msg)
        return spec
    if scheme == "efficient":
        return EfficientFamily()
    msg = f"unknown scheme {scheme!r}"
    raise ContractError(msg)


def rj_step(
    state: ParamState,
    data: ObservationSeries,
    priors: PriorConfig,
    move_spec: MoveSpec,
    scheme: Scheme | ProposalFamily,
    spec: VanillaProposalSpec | None,
    rng: np.random.Generator,
) -> tuple[ParamState, JumpEvent | None]:
    """Gibbs sweep within the current model, then possibly one jump attempt."""
    family = proposal_family(scheme, spec) if isinstance(scheme, str) else scheme
    state = gibbs_sweep(state, data, priors, rng)
    if rng.random() >= move_spec.between_move_prob:
        return state, None
    target = move_spec.draw_target(state.model, rng)
    proposal = propose_jump(state, target, family, rng)
    log_accept = jump_log_accept(
        state,
        proposal.candidate,
        proposal.log_q_forward,
        proposal.log_q_reverse,
        (state.model, target),
        move_spec,
        data,
        priors,
    )
    accepted = math.log1p(-rng.random()) < log_accept
    event = JumpEvent(state.model, target, accepted, log_accept, proposal.fallback_used)
    return (proposal.candidate if accepted else state), event


def run_rj(
    data: ObservationSeries,
    priors: PriorConfig,
    config: ChainConfig,
    move_spec: MoveSpec,
    scheme: Scheme,
    spec: VanillaProposalSpec | None = None,
    init: ParamState | None = None,
) -> ChainRecord:
    family = proposal_family(scheme, spec)
    rng = config.rng()
    state = init if init is not None else default_init(ModelId.M1, data)
    recorder = ChainRecorder(data.n, config, sampler=f"rj-{scheme}")
    stats = MoveStats()
    for it in range(1, config.iterations + 1):
        state, event = rj_step(state, data, priors, move_spec, family, spec, rng)
        stats.record(event)
        recorder.offer(it, state)
    record = recorder.finish(
        {"scheme": scheme, "iterations": config.iterations, "moves": stats.to_dict()}
    )
    record.meta["model_probabilities"] = {
        m.label: p for m, p in record.model_probabilities().items()
    }
    logger.debug(
        "rj %s: model probabilities %s, fallbacks %d",
        scheme,
        record.meta["model_probabilities"],
        stats.fallbacks,
    )
    return record


def pooled_model_probabilities(records: Sequence[ChainRecord]) -> dict[ModelId, float]:
    """Visit frequencies over all retained draws of all chains."""
    models = np.concatenate([r.models for r in records]).astype(np.int64)
    counts = np.bincount(models, minlength=len(ModelId) + 1)
    total = int(counts.sum())
    return {m: float(counts[int(m)]) / total for m in ModelId}


def transition_counts(chain: ChainRecord | Sequence[int]) -> np.ndarray:
    """3x3 first-order transition counts of the model indicator."""
    models = np.asarray(chain.models if isinstance(chain, ChainRecord) else chain, dtype=np.int64)
    if len(models) < 2:  # noqa: PLR2004
        msg = "transition matrix needs at least two retained iterations"
        raise ContractError(msg)
    counts = np.zeros((3, 3))
    np.add.at(counts, (models[:-1] - 1, models[1:] - 1), 1.0)
    return counts


def _normalise_rows(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(totals > 0, counts / totals, np.nan)


def empirical_transition_matrix(chain: ChainRecord | Sequence[int]) -> np.ndarray:
    """Row-normalised first-order transition counts of the model indicator.

    Rows of models never left from are NaN (undefined), not zero.
    """
    return _normalise_rows(transition_counts(chain))


def pooled_transition_matrix(records: Sequence[ChainRecord]) -> np.ndarray:
    """Counts summed within each chain, never across chain boundaries."""
    return _normalise_rows(sum((transition_counts(r) for r in records), np.zeros((3, 3))))


def transition_matrix_to_dict(matrix: np.ndarray) -> dict[str, Any]:
    rows: dict[str, Any] = {}
    for m in ModelId:
        row = matrix[int(m) - 1]
        rows[m.label] = "undefined" if np.all(np.isnan(row)) else [float(v) for v in row]
    return {"order": [m.label for m in ModelId], "rows": rows}
