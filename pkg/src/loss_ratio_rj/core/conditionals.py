"""Closed-form full conditionals for every parameter of M1, M2 and M3.

M2 and M3 reuse the M1 expressions with rho substituted (1 and 0); the
``_*_moments`` helpers take plain arrays so the Gibbs sweep can call them on a
working copy without rebuilding states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from loss_ratio_rj.core.densities import gamma_logpdf, normal_logpdf
from loss_ratio_rj.core.model import ModelId, ObservationSeries, ParamState, PriorConfig
from loss_ratio_rj.errors import ContractError


@dataclass(frozen=True)
class GammaParams:
    """Gamma law with density proportional to x^(shape-1) exp(-rate x)."""

    shape: float
    rate: float

    def __post_init__(self) -> None:
        if not (self.shape > 0 and self.rate > 0):
            msg = f"gamma parameters must be positive, got {self.shape!r}, {self.rate!r}"
            raise ContractError(msg)

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    def logpdf(self, x: float) -> float:
        return gamma_logpdf(x, self.shape, self.rate)

    def sample(self, rng: np.random.Generator) -> float:
        # numpy's standard_gamma is exact for shape < 1 as well
        return float(rng.gamma(self.shape, 1.0 / self.rate))


@dataclass(frozen=True)
class NormalParams:
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not self.variance > 0:
            msg = f"variance must be positive, got {self.variance!r}"
            raise ContractError(msg)

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def logpdf(self, x: float) -> float:
        return float(normal_logpdf(x, self.mean, self.variance))

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.normal(self.mean, self.sd))

    def to_dict(self) -> dict[str, float]:
        return {"mean": self.mean, "variance": self.variance}



# Array-level moments. ``prev`` is alpha_{j-1} for j = 1..n (alpha_0 first).
# Under M3 the alpha_0 slot is absent (NaN or None) and under M2 eta is None;
# the helpers below only read them where rho gives them weight.


def _drift(rho: float, eta: float | None) -> float:
    """(1 - rho) eta; eta may be absent only at rho = 1."""
    if eta is None:
        if rho != 1.0:
            msg = f"eta is absent but rho = {rho!r} gives it weight"
            raise ContractError(msg)
        return 0.0
    return (1.0 - rho) * eta


def _carried(rho: float, before: float | None) -> float:
    """rho alpha_{j-1}; alpha_0 may be absent only at rho = 0."""
    if before is None:
        if rho != 0.0:
            msg = f"alpha0 is absent but rho = {rho!r} gives it weight"
            raise ContractError(msg)
        return 0.0
    return rho * before


def _lagged(rho: float, prev: np.ndarray) -> np.ndarray:
    # rho = 0 never reads the (possibly NaN) alpha_0 slot
    return np.zeros_like(prev) if rho == 0.0 else rho * prev


def _sigma_moments(
    alpha: np.ndarray, exposure: np.ndarray, ratio: np.ndarray, a1: float, b1: float
) -> tuple[float, float]:
    resid = ratio - alpha
    return a1 + 0.5 * len(alpha), b1 + 0.5 * float(np.dot(exposure, resid * resid))


def _tau_moments(
    alpha: np.ndarray, prev: np.ndarray, rho: float, eta: float | None, a2: float, b2: float
) -> tuple[float, float]:
    innov = alpha - _lagged(rho, prev) - _drift(rho, eta)
    return a2 + 0.5 * len(alpha), b2 + 0.5 * float(np.dot(innov, innov))


def _rho_moments(
    alpha: np.ndarray, prev: np.ndarray, eta: float, tau: float
) -> tuple[float, float]:
    lag = eta - prev
    precision = 1.0 + tau * float(np.dot(lag, lag))
    return tau * float(np.dot(eta - alpha, lag)) / precision, 1.0 / precision


def _eta_moments(
    alpha: np.ndarray, prev: np.ndarray, rho: float, tau: float
) -> tuple[float, float]:
    n = len(alpha)
    precision = 1.0 + n * tau * (1.0 - rho) ** 2
    total = float(np.sum(alpha - _lagged(rho, prev)))
    return tau * (1.0 - rho) * total / precision, 1.0 / precision


def _alpha_moments(
    j: int,
    alpha: np.ndarray,
    alpha0: float | None,
    rho: float,
    eta: float | None,
    sigma: float,
    tau: float,
    exposure: np.ndarray,
    ratio: np.ndarray,
) -> tuple[float, float]:
    """Mean and variance of alpha_j, j = 0..n (alpha is alpha_1..alpha_n)."""
    n = len(alpha)
    drift = _drift(rho, eta)
    if j == 0:
        if alpha0 is None:
            msg = "alpha0 is absent from this model"
            raise ContractError(msg)
        precision = 1.0 + rho * rho * tau
        return rho * tau * (alpha[0] - drift) / precision, 1.0 / precision
    before = alpha0 if j == 1 else float(alpha[j - 2])
    data_prec = sigma * exposure[j - 1]
    numer = tau * (_carried(rho, before) + drift) + data_prec * ratio[j - 1]
    precision = tau + data_prec
    if j < n:
        numer += rho * tau * (alpha[j] - drift)
        precision += rho * rho * tau
    return numer / precision, 1.0 / precision

def sigma_conditional(
    state: ParamState, data: ObservationSeries, priors: PriorConfig
) -> GammaParams:
    shape, rate = _sigma_moments(state.alpha, data.exposure, data.ratio, priors.a1, priors.b1)
    return GammaParams(shape, rate)


def tau_conditional(state: ParamState, data: ObservationSeries, priors: PriorConfig) -> GammaParams:
    shape, rate = _tau_moments(
        state.alpha, state.previous_alpha(), state.rho, state.eta, priors.a2, priors.b2
    )
    return GammaParams(shape, rate)


def rho_conditional(
    state: ParamState,
    data: ObservationSeries,  # noqa: ARG001
    priors: PriorConfig,  # noqa: ARG001
) -> NormalParams:
    if not state.model.free_rho or state.eta is None:
        msg = f"rho is fixed under {state.model.name}"
        raise ContractError(msg)
    mean, var = _rho_moments(state.alpha, state.previous_alpha(), state.eta, state.tau)
    return NormalParams(mean, var)


def eta_conditional(
    state: ParamState,
    data: ObservationSeries,  # noqa: ARG001
    priors: PriorConfig,  # noqa: ARG001
) -> NormalParams:
    if not state.model.has_eta:
        msg = f"{state.model.name} has no eta"
        raise ContractError(msg)
    mean, var = _eta_moments(state.alpha, state.previous_alpha(), state.rho, state.tau)
    return NormalParams(mean, var)


def alpha_conditional(
    j: int,
    state: ParamState,
    data: ObservationSeries,
    priors: PriorConfig,  # noqa: ARG001
) -> NormalParams:
    """Full conditional of alpha_j; j = 0 is alpha_0 (M1 and M2 only)."""
    if not 0 <= j <= state.n:
        msg = f"alpha index {j} outside 0..{state.n}"
        raise ContractError(msg)
    if j == 0 and not state.model.has_alpha0:
        msg = "M3 has no alpha0"
        raise ContractError(msg)
    mean, var = _alpha_moments(
        j,
        state.alpha,
        state.alpha0,
        state.rho,
        state.eta,
        state.sigma,
        state.tau,
        data.exposure,
        data.ratio,
    )
    return NormalParams(mean, var)


def reduced_conditional(model: ModelId, alpha: np.ndarray, tau: float) -> NormalParams:
    """Conditional of the one model-specific scalar of M2 (alpha0') or M3 (eta'')."""
    alpha = np.asarray(alpha, dtype=float)
    model = ModelId(model)
    if model is ModelId.M2:
        precision = 1.0 + tau
        return NormalParams(tau * float(alpha[0]) / precision, 1.0 / precision)
    if model is ModelId.M3:
        precision = 1.0 + len(alpha) * tau
        return NormalParams(tau * float(np.sum(alpha)) / precision, 1.0 / precision)
    msg = "reduced conditionals exist for M2 and M3 only"
    raise ContractError(msg)
