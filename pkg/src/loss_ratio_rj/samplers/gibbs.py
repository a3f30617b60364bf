"""Systematic-scan Gibbs sampler for M1, M2 and M3."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from loss_ratio_rj.core.conditionals import (
    _alpha_moments,
    _eta_moments,
    _rho_moments,
    _sigma_moments,
    _tau_moments,
)
from loss_ratio_rj.core.model import ModelId, ObservationSeries, ParamState, PriorConfig
from loss_ratio_rj.errors import ContractError
from loss_ratio_rj.samplers.chain import ChainConfig, ChainRecord, ChainRecorder

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class _Working:
    """Mutable copy of a state used inside one sweep; absent coordinates stay None."""

    model: ModelId
    alpha: np.ndarray
    alpha0: float | None
    rho: float
    eta: float | None
    sigma: float
    tau: float

    @classmethod
    def from_state(cls, state: ParamState) -> _Working:
        return cls(
            model=state.model,
            alpha=np.array(state.alpha, dtype=float),
            alpha0=state.alpha0,
            rho=state.rho,
            eta=state.eta,
            sigma=state.sigma,
            tau=state.tau,
        )

    def to_state(self) -> ParamState:
        return ParamState.for_model(
            self.model,
            self.alpha,
            alpha0=self.alpha0,
            rho=self.rho,
            eta=self.eta,
            sigma=self.sigma,
            tau=self.tau,
        )


def _sweep(
    work: _Working, data: ObservationSeries, priors: PriorConfig, rng: np.random.Generator
) -> None:
    model = work.model
    alpha = work.alpha
    exposure, ratio = data.exposure, data.ratio
    if model.has_alpha0:
        mean, var = _alpha_moments(
            0, alpha, work.alpha0, work.rho, work.eta, work.sigma, work.tau, exposure, ratio
        )
        work.alpha0 = rng.normal(mean, math.sqrt(var))
    for j in range(1, len(alpha) + 1):
        mean, var = _alpha_moments(
            j, alpha, work.alpha0, work.rho, work.eta, work.sigma, work.tau, exposure, ratio
        )
        alpha[j - 1] = rng.normal(mean, math.sqrt(var))
    first = math.nan if work.alpha0 is None else work.alpha0
    prev = np.concatenate(([first], alpha[:-1]))
    if model.free_rho:
        mean, var = _rho_moments(alpha, prev, work.eta, work.tau)  # type: ignore[arg-type]
        work.rho = rng.normal(mean, math.sqrt(var))
    if model.has_eta:
        mean, var = _eta_moments(alpha, prev, work.rho, work.tau)
        work.eta = rng.normal(mean, math.sqrt(var))
    shape, rate = _sigma_moments(alpha, exposure, ratio, priors.a1, priors.b1)
    work.sigma = rng.gamma(shape, 1.0 / rate)
    shape, rate = _tau_moments(alpha, prev, work.rho, work.eta, priors.a2, priors.b2)
    work.tau = rng.gamma(shape, 1.0 / rate)


def gibbs_sweep(
    state: ParamState,
    data: ObservationSeries,
    priors: PriorConfig,
    rng: np.random.Generator,
) -> ParamState:
    """One scan: alpha0, alpha_1..alpha_n, rho, eta, sigma, tau from exact conditionals."""
    work = _Working.from_state(state)
    _sweep(work, data, priors, rng)
    return work.to_state()


def default_init(model: ModelId, data: ObservationSeries) -> ParamState:
    """Data-moment start: every alpha at mean(R), eta = mean(R), rho = 0.5, sigma = tau = 1."""
    level = data.mean_ratio
    return ParamState.for_model(
        model, np.full(data.n, level), alpha0=level, rho=0.5, eta=level, sigma=1.0, tau=1.0
    )


def run_gibbs(
    model: ModelId,
    data: ObservationSeries,
    priors: PriorConfig,
    config: ChainConfig,
    init: ParamState | None = None,
) -> ChainRecord:
    model = ModelId(model)
    state = init if init is not None else default_init(model, data)
    if state.model is not model:
        msg = f"initial state is {state.model.name}, sampler runs {model.name}"
        raise ContractError(msg)
    rng = config.rng()
    recorder = ChainRecorder(data.n, config, sampler=f"gibbs-{model.label}")
    work = _Working.from_state(state)
    for it in range(1, config.iterations + 1):
        _sweep(work, data, priors, rng)
        if config.keeps(it):
            recorder.offer(it, work.to_state())
    logger.debug("gibbs %s: %d sweeps, %d retained", model.name, config.iterations, config.retained)
    return recorder.finish({"model": model.label})
