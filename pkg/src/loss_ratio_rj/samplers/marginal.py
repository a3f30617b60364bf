"""Random-walk Metropolis on the M1 posterior with sigma and tau integrated out.

Scalar updates for rho, eta and alpha0 use uniform proposals centred at the
current value; alpha_1..alpha_n move as one block with a Gaussian proposal
whose covariance comes from a Gibbs pilot run. All tuning happens in
:func:`tune_widths`; :func:`run_marginal` only reads a frozen :class:`RwTuning`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from loss_ratio_rj.core.model import ModelId, ObservationSeries, PriorConfig, log_marginal_target
from loss_ratio_rj.errors import ConfigError, ContractError
from loss_ratio_rj.samplers.chain import ChainConfig, ChainRecord, ChainRecorder
from loss_ratio_rj.samplers.gibbs import run_gibbs

logger = logging.getLogger(__name__)

Scalar = Literal["rho", "eta", "alpha0"]
SCALARS: tuple[Scalar, ...] = ("rho", "eta", "alpha0")
DEFAULT_TARGET_RATES: dict[str, float] = {"rho": 0.27, "eta": 0.15, "alpha0": 0.29, "alpha": 0.15}
_VARIANCE_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class MarginalState:
    """Current point of the marginal chain together with its cached log target."""

    alpha0: float
    alpha: np.ndarray
    rho: float
    eta: float
    log_target: float

    @classmethod
    def evaluate(
        cls,
        alpha0: float,
        alpha: np.ndarray,
        rho: float,
        eta: float,
        data: ObservationSeries,
        priors: PriorConfig,
    ) -> MarginalState:
        alpha = np.array(alpha, dtype=float)
        alpha.setflags(write=False)
        value = log_marginal_target(alpha0, alpha, rho, eta, data, priors)
        return cls(float(alpha0), alpha, float(rho), float(eta), value)

    @classmethod
    def initial(cls, data: ObservationSeries, priors: PriorConfig) -> MarginalState:
        level = data.mean_ratio
        return cls.evaluate(level, np.full(data.n, level), 0.5, level, data, priors)

    def scalar(self, which: Scalar) -> float:
        return float(getattr(self, which))

    def moved(self, data: ObservationSeries, priors: PriorConfig, **changes: Any) -> MarginalState:
        """New state with ``changes`` applied and the target re-evaluated."""
        values = {"alpha0": self.alpha0, "alpha": self.alpha, "rho": self.rho, "eta": self.eta}
        values.update(changes)
        return MarginalState.evaluate(data=data, priors=priors, **values)


@dataclass(frozen=True, eq=False)
class RwTuning:
    width_rho: float
    width_eta: float
    width_alpha0: float
    alpha_cov: np.ndarray
    target_rates: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TARGET_RATES))
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        for name in SCALARS:
            width = self.width(name)
            if not (width > 0 and math.isfinite(width)):
                msg = f"width_{name} must be positive, got {width!r}"
                raise ContractError(msg)
        cov = np.array(self.alpha_cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            msg = f"alpha_cov must be square, got shape {cov.shape}"
            raise ContractError(msg)
        if not np.allclose(cov, cov.T, rtol=1e-10, atol=0.0):
            msg = "alpha_cov must be symmetric"
            raise ContractError(msg)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            msg = "alpha_cov is not positive definite"
            raise ContractError(msg) from exc
        cov.setflags(write=False)
        object.__setattr__(self, "alpha_cov", cov)
        object.__setattr__(self, "_chol", chol)

    def width(self, which: Scalar) -> float:
        return float(getattr(self, f"width_{which}"))

    @property
    def alpha_chol(self) -> np.ndarray:
        return self._chol

    def to_dict(self) -> dict[str, Any]:
        return {
            "width_rho": self.width_rho,
            "width_eta": self.width_eta,
            "width_alpha0": self.width_alpha0,
            "alpha_cov": self.alpha_cov.tolist(),
            "target_rates": dict(self.target_rates),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> RwTuning:
        try:
            return cls(
                width_rho=float(payload["width_rho"]),
                width_eta=float(payload["width_eta"]),
                width_alpha0=float(payload["width_alpha0"]),
                alpha_cov=np.asarray(payload["alpha_cov"], dtype=float),
                target_rates={
                    k: float(v)
                    for k, v in payload.get("target_rates", DEFAULT_TARGET_RATES).items()
                },
            )
        except (KeyError, TypeError, ValueError) as exc:
            msg = f"malformed tuning payload: {exc}"
            raise ContractError(msg) from exc


def _metropolis(delta: float, rng: np.random.Generator) -> bool:
    # 1 - U lies in (0, 1], so the log is finite
    return math.log1p(-rng.random()) < delta


def rw_scalar_update(
    which: Scalar,
    state: MarginalState,
    tuning: RwTuning,
    data: ObservationSeries,
    priors: PriorConfig,
    rng: np.random.Generator,
) -> tuple[MarginalState, bool]:
    """Uniform random-walk step for one of rho, eta, alpha0.

    The proposal is symmetric, so only the target difference enters.
    """
    if which not in SCALARS:
        msg = f"no scalar update for {which!r}"
        raise ContractError(msg)
    width = tuning.width(which)
    proposal = state.scalar(which) + rng.uniform(-width, width)
    candidate = state.moved(data, priors, **{which: proposal})
    if _metropolis(candidate.log_target - state.log_target, rng):
        return candidate, True
    return state, False


def rw_block_update_alpha(
    state: MarginalState,
    tuning: RwTuning,
    data: ObservationSeries,
    priors: PriorConfig,
    rng: np.random.Generator,
) -> tuple[MarginalState, bool]:
    """Gaussian random-walk step for alpha_1..alpha_n using the Cholesky factor of alpha_cov."""
    step = tuning.alpha_chol @ rng.standard_normal(len(state.alpha))
    candidate = state.moved(data, priors, alpha=state.alpha + step)
    if _metropolis(candidate.log_target - state.log_target, rng):
        return candidate, True
    return state, False


def marginal_sweep(
    state: MarginalState,
    tuning: RwTuning,
    data: ObservationSeries,
    priors: PriorConfig,
    rng: np.random.Generator,
) -> tuple[MarginalState, dict[str, bool]]:
    """rho, eta, alpha0, then the alpha block."""
    accepted: dict[str, bool] = {}
    for name in SCALARS:
        state, accepted[name] = rw_scalar_update(name, state, tuning, data, priors, rng)
    state, accepted["alpha"] = rw_block_update_alpha(state, tuning, data, priors, rng)
    return state, accepted


class WidthAdapter:
    """Stochastic-approximation width control, applied once per batch.

    ``width <- width * exp(kappa / sqrt(batch) * (rate - target))``; the alpha
    block gets the same rule on a scale factor multiplying its covariance.
    """

    def __init__(self, tuning: RwTuning, kappa: float = 0.5) -> None:
        if kappa < 0:
            msg = f"kappa must be nonnegative, got {kappa}"
            raise ConfigError(msg)
        self.kappa = kappa
        self.base_cov = tuning.alpha_cov
        self.target_rates = dict(tuning.target_rates)
        self.widths = {name: tuning.width(name) for name in SCALARS}
        self.alpha_scale = 1.0
        self.batch = 0
        self._accepts = dict.fromkeys((*SCALARS, "alpha"), 0)
        self._count = 0
        self.last_rates: dict[str, float] = {}

    def record(self, accepted: dict[str, bool]) -> None:
        for name, ok in accepted.items():
            self._accepts[name] += int(ok)
        self._count += 1

    def end_batch(self) -> None:
        if self._count == 0:
            return
        self.batch += 1
        gain = self.kappa / math.sqrt(self.batch)
        rates = {name: hits / self._count for name, hits in self._accepts.items()}
        for name in SCALARS:
            self.widths[name] *= math.exp(gain * (rates[name] - self.target_rates[name]))
        self.alpha_scale *= math.exp(gain * (rates["alpha"] - self.target_rates["alpha"]))
        self.last_rates = rates
        self._accepts = dict.fromkeys(self._accepts, 0)
        self._count = 0

    def freeze(self) -> RwTuning:
        return RwTuning(
            width_rho=self.widths["rho"],
            width_eta=self.widths["eta"],
            width_alpha0=self.widths["alpha0"],
            alpha_cov=self.alpha_scale**2 * self.base_cov,
            target_rates=self.target_rates,
        )


@dataclass(frozen=True)
class MarginalPilotConfig:
    """Pilot schedule: a Gibbs run of M1, then adaptive marginal batches."""

    gibbs_iterations: int = 5000
    gibbs_burn_in: int = 1000
    batches: int = 50
    batch_size: int = 100
    kappa: float = 0.5
    seed: int = 0
    target_rates: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TARGET_RATES))

    def __post_init__(self) -> None:
        if self.batches < 0 or self.batch_size < 1:
            msg = "batches must be >= 0 and batch_size >= 1"
            raise ConfigError(msg)
        missing = {*SCALARS, "alpha"} - set(self.target_rates)
        if missing:
            msg = f"target_rates missing {sorted(missing)}"
            raise ConfigError(msg)
        if not all(0 < r < 1 for r in self.target_rates.values()):
            msg = "target rates must lie in (0, 1)"
            raise ConfigError(msg)


def pilot_alpha_covariance(alpha_trace: np.ndarray) -> tuple[np.ndarray, bool]:
    """Empirical covariance of an alpha trace; ``(cov, diagonal_fallback)``.

    A rank-deficient estimate is replaced by the diagonal of sample variances
    floored at a small positive value.
    """
    trace = np.atleast_2d(np.asarray(alpha_trace, dtype=float))
    n = trace.shape[1]
    cov = np.atleast_2d(np.cov(trace, rowvar=False)) if len(trace) > 1 else np.zeros((n, n))
    if np.all(np.isfinite(cov)) and np.linalg.matrix_rank(cov) == n:
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            pass
        else:
            return cov, False
    variances = np.var(trace, axis=0) if len(trace) else np.zeros(n)
    logger.warning("pilot alpha covariance is rank deficient; using its diagonal")
    return np.diag(np.maximum(variances, _VARIANCE_FLOOR)), True


def tune_widths(
    data: ObservationSeries,
    priors: PriorConfig,
    pilot_config: MarginalPilotConfig | None = None,
) -> RwTuning:
    """Tune proposal widths and the alpha covariance before any retained sampling."""
    cfg = pilot_config or MarginalPilotConfig()
    seeds = np.random.SeedSequence(cfg.seed).spawn(2)
    gibbs_cfg = ChainConfig(
        iterations=cfg.gibbs_iterations,
        burn_in=cfg.gibbs_burn_in,
        seed=int(seeds[0].generate_state(1, dtype=np.uint64)[0]),
    )
    pilot = run_gibbs(ModelId.M1, data, priors, gibbs_cfg)
    alpha_trace = np.column_stack([pilot.column(f"alpha{j}") for j in range(1, data.n + 1)])
    cov, _ = pilot_alpha_covariance(alpha_trace)
    sds = {name: float(np.std(pilot.column(name))) for name in SCALARS}
    start = RwTuning(
        width_rho=max(2.0 * sds["rho"], 1e-6),
        width_eta=max(2.0 * sds["eta"], 1e-6),
        width_alpha0=max(2.0 * sds["alpha0"], 1e-6),
        alpha_cov=cov,
        target_rates=cfg.target_rates,
    )
    adapter = WidthAdapter(start, kappa=cfg.kappa)
    rng = np.random.default_rng(seeds[1])
    last = pilot.snapshot(len(pilot) - 1)
    state = MarginalState.evaluate(last.alpha0, last.alpha, last.rho, last.eta, data, priors)
    for _ in range(cfg.batches):
        tuning = adapter.freeze()
        for _ in range(cfg.batch_size):
            state, accepted = marginal_sweep(state, tuning, data, priors, rng)
            adapter.record(accepted)
        adapter.end_batch()
    tuned = adapter.freeze()
    logger.debug(
        "tuned widths rho=%.4g eta=%.4g alpha0=%.4g alpha-scale=%.3g, last rates %s",
        tuned.width_rho,
        tuned.width_eta,
        tuned.width_alpha0,
        adapter.alpha_scale,
        adapter.last_rates,
    )
    return tuned


def run_marginal(
    data: ObservationSeries,
    priors: PriorConfig,
    config: ChainConfig,
    tuning: RwTuning,
    init: MarginalState | None = None,
) -> ChainRecord:
    """Fixed-tuning marginal chain; sigma and tau columns stay empty."""
    if tuning.alpha_cov.shape != (data.n, data.n):
        msg = f"alpha_cov is {tuning.alpha_cov.shape}, data has n={data.n}"
        raise ContractError(msg)
    rng = config.rng()
    state = init if init is not None else MarginalState.initial(data, priors)
    recorder = ChainRecorder(data.n, config, sampler="marginal")
    accepts = dict.fromkeys((*SCALARS, "alpha"), 0)
    for it in range(1, config.iterations + 1):
        state, accepted = marginal_sweep(state, tuning, data, priors, rng)
        for name, ok in accepted.items():
            accepts[name] += int(ok)
        recorder.offer_marginal(it, state.alpha0, state.alpha, state.rho, state.eta)
    rates = {name: hits / config.iterations for name, hits in accepts.items()}
    logger.debug("marginal acceptance rates %s", rates)
    return recorder.finish({"acceptance_rates": rates, "tuning": tuning.to_dict()})
