"""Between-model proposal laws.

Every jump discards the source model's own coordinates and draws the target
model's own coordinates; alpha_1..alpha_n, sigma and tau carry over unchanged.
Own coordinates are (alpha0, rho, eta) for M1, alpha0 for M2 and eta for M3,
so every mapping is the identity and no Jacobian term arises.

Two families supply the laws:

* :class:`VanillaProposalSpec` - independent Gaussians fitted to pilot Gibbs
  runs of each model.
* :class:`EfficientFamily` - a second-order match of the M1 posterior in
  (alpha0, rho, eta) around a centering point, and the exact conditional
  posteriors for the single own coordinate of M2 and M3.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np
from scipy import linalg, stats

from loss_ratio_rj.core.conditionals import NormalParams, reduced_conditional
from loss_ratio_rj.core.model import ModelId, ObservationSeries, PriorConfig
from loss_ratio_rj.errors import ConfigError, ContractError
from loss_ratio_rj.samplers.chain import ChainConfig, ChainRecord
from loss_ratio_rj.samplers.gibbs import run_gibbs

logger = logging.getLogger(__name__)

OWN_COORDINATES: dict[ModelId, tuple[str, ...]] = {
    ModelId.M1: ("alpha0", "rho", "eta"),
    ModelId.M2: ("alpha0",),
    ModelId.M3: ("eta",),
}
PILOT_VARIANCE_FLOOR = 1e-8
PIVOT_TOLERANCE = 1e-12


def auxiliary_dimensions(source: ModelId, target: ModelId) -> tuple[int, int]:
    """(dim u, dim v) of a jump: drawn and discarded coordinate counts."""
    return len(OWN_COORDINATES[ModelId(target)]), len(OWN_COORDINATES[ModelId(source)])


@dataclass(frozen=True, eq=False)
class MoveSpec:
    """Jump-attempt probability and the target-selection matrix r."""

    between_move_prob: float = 0.5
    r: np.ndarray = field(
        default_factory=lambda: np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
    )

    def __post_init__(self) -> None:
        r = np.array(self.r, dtype=float)
        if r.shape != (3, 3):
            msg = f"r must be 3x3, got {r.shape}"
            raise ConfigError(msg)
        if not 0.0 <= self.between_move_prob <= 1.0:
            msg = f"between_move_prob must lie in [0, 1], got {self.between_move_prob}"
            raise ConfigError(msg)
        off = r[~np.eye(3, dtype=bool)]
        if np.any(off < 0) or np.any(np.diag(r) != 0):
            msg = "r must be nonnegative with a zero diagonal"
            raise ConfigError(msg)
        if not np.allclose(r.sum(axis=1), 1.0, atol=1e-12):
            msg = f"each row of r must sum to 1, got {r.sum(axis=1).tolist()}"
            raise ConfigError(msg)
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    def prob(self, source: ModelId, target: ModelId) -> float:
        return float(self.r[int(source) - 1, int(target) - 1])

    def draw_target(self, source: ModelId, rng: np.random.Generator) -> ModelId:
        row = self.r[int(source) - 1]
        return ModelId(int(rng.choice(3, p=row)) + 1)

    def to_dict(self) -> dict[str, Any]:
        return {"between_move_prob": self.between_move_prob, "r": self.r.tolist()}


class CoordinateLaw(Protocol):
    """Density over one model's own coordinates."""

    fallback_used: bool

    def logpdf(self, x: np.ndarray) -> float: ...

    def sample(self, rng: np.random.Generator) -> np.ndarray: ...


@dataclass(frozen=True)
class IndependentNormals:
    laws: tuple[NormalParams, ...]
    fallback_used: bool = False

    def logpdf(self, x: np.ndarray) -> float:
        return float(sum(law.logpdf(float(v)) for law, v in zip(self.laws, x, strict=True)))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.array([law.sample(rng) for law in self.laws])


class ProposalFamily(Protocol):
    name: str

    def law(
        self, model: ModelId, counterpart: ModelId, alpha: np.ndarray, tau: float
    ) -> CoordinateLaw:
        """Law of ``model``'s own coordinates for a jump between ``model`` and ``counterpart``."""
        ...


# ----------------------------------------------------------------------------- vanilla


@dataclass(frozen=True)
class VanillaProposalSpec:
    """Pilot-fitted Gaussians: M1's alpha0, rho, eta; M2's alpha0'; M3's eta''."""

    alpha0: NormalParams
    rho: NormalParams
    eta: NormalParams
    alpha0_m2: NormalParams
    eta_m3: NormalParams
    name: str = "vanilla"

    def law(
        self,
        model: ModelId,
        counterpart: ModelId,  # noqa: ARG002
        alpha: np.ndarray,  # noqa: ARG002
        tau: float,  # noqa: ARG002
    ) -> IndependentNormals:
        model = ModelId(model)
        if model is ModelId.M1:
            return IndependentNormals((self.alpha0, self.rho, self.eta))
        if model is ModelId.M2:
            return IndependentNormals((self.alpha0_m2,))
        return IndependentNormals((self.eta_m3,))

    def to_dict(self) -> dict[str, dict[str, float]]:
        return {
            "alpha0": self.alpha0.to_dict(),
            "rho": self.rho.to_dict(),
            "eta": self.eta.to_dict(),
            "alpha0_m2": self.alpha0_m2.to_dict(),
            "eta_m3": self.eta_m3.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Mapping[str, float]]) -> VanillaProposalSpec:
        try:
            laws = {
                key: NormalParams(float(payload[key]["mean"]), float(payload[key]["variance"]))
                for key in ("alpha0", "rho", "eta", "alpha0_m2", "eta_m3")
            }
        except (KeyError, TypeError) as exc:
            msg = f"malformed vanilla proposal spec: {exc}"
            raise ConfigError(msg) from exc
        return cls(**laws)


@dataclass(frozen=True)
class PilotConfig:
    iterations: int = 5000
    burn_in: int = 1000
    seed: int = 0

    def chain_config(self, seed: int) -> ChainConfig:
        return ChainConfig(iterations=self.iterations, burn_in=self.burn_in, seed=seed)

    def to_dict(self) -> dict[str, int]:
        return {"iterations": self.iterations, "burn_in": self.burn_in, "seed": self.seed}


def run_pilots(
    data: ObservationSeries, priors: PriorConfig, pilot_config: PilotConfig | None = None
) -> dict[ModelId, ChainRecord]:
    """One Gibbs run per model, each on its own spawned seed."""
    cfg = pilot_config or PilotConfig()
    children = np.random.SeedSequence(cfg.seed).spawn(len(ModelId))
    records = {}
    for model, child in zip(ModelId, children, strict=True):
        seed = int(child.generate_state(1, dtype=np.uint64)[0])
        records[model] = run_gibbs(model, data, priors, cfg.chain_config(seed))
        logger.debug("pilot %s finished with %d draws", model.name, len(records[model]))
    return records


def _pilot_moments(record: ChainRecord, name: str) -> NormalParams:
    trace = record.column(name)
    variance = float(np.var(trace))
    if not variance >= PILOT_VARIANCE_FLOOR:
        logger.warning(
            "pilot variance of %s under %s is %.3g; flooring at %g",
            name,
            record.sampler,
            variance,
            PILOT_VARIANCE_FLOOR,
        )
        variance = PILOT_VARIANCE_FLOOR
    return NormalParams(float(np.mean(trace)), variance)


def spec_from_pilots(records: Mapping[ModelId, ChainRecord]) -> VanillaProposalSpec:
    m1 = records[ModelId.M1]
    return VanillaProposalSpec(
        alpha0=_pilot_moments(m1, "alpha0"),
        rho=_pilot_moments(m1, "rho"),
        eta=_pilot_moments(m1, "eta"),
        alpha0_m2=_pilot_moments(records[ModelId.M2], "alpha0"),
        eta_m3=_pilot_moments(records[ModelId.M3], "eta"),
    )


def pilot_tune(
    data: ObservationSeries, priors: PriorConfig, pilot_config: PilotConfig | None = None
) -> VanillaProposalSpec:
    return spec_from_pilots(run_pilots(data, priors, pilot_config))


# ----------------------------------------------------------------------------- efficient


@dataclass(frozen=True, eq=False)
class EfficientProposal:
    """Gaussian over (alpha0, rho, eta) matched to the M1 posterior at ``centering``."""

    mu: np.ndarray
    sigma: np.ndarray
    fallback_used: bool
    centering: tuple[float, float, float]
    precision: np.ndarray

    def logpdf(self, x: np.ndarray) -> float:
        return float(stats.multivariate_normal.logpdf(x, mean=self.mu, cov=self.sigma))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        chol = linalg.cholesky(self.sigma, lower=True)
        return self.mu + chol @ rng.standard_normal(3)


def centering_point(move: tuple[ModelId, ModelId], alpha: np.ndarray) -> tuple[float, float, float]:
    """Fallback centering at which every off-diagonal precision entry vanishes.

    M1<->M2: (alpha_n, 1, 2 alpha_n - alpha_1);
    M1<->M3: (2 n alpha_1 - 2 sum(alpha) + alpha_n, 0, alpha_1).
    """
    other = _counterpart_of_m1(move)
    alpha = np.asarray(alpha, dtype=float)
    first, last = float(alpha[0]), float(alpha[-1])
    if other is ModelId.M2:
        return last, 1.0, 2.0 * last - first
    n = len(alpha)
    return 2.0 * n * first - 2.0 * float(np.sum(alpha)) + last, 0.0, first


def primary_centering(
    move: tuple[ModelId, ModelId], alpha: np.ndarray, tau: float
) -> tuple[float, float, float]:
    """Centering tried first: the reduced model's conditional mean, rho at its fixed value."""
    other = _counterpart_of_m1(move)
    alpha = np.asarray(alpha, dtype=float)
    if other is ModelId.M2:
        return tau * float(alpha[0]) / (1.0 + tau), 1.0, float(np.mean(alpha))
    return 0.0, 0.0, tau * float(np.sum(alpha)) / (1.0 + len(alpha) * tau)


def _counterpart_of_m1(move: tuple[ModelId, ModelId]) -> ModelId:
    a, b = (ModelId(m) for m in move)
    if ModelId.M1 not in (a, b) or a == b:
        msg = f"move {a.name}->{b.name} does not involve M1"
        raise ContractError(msg)
    return b if a is ModelId.M1 else a


def _curvature(
    alpha: np.ndarray, tau: float, centering: tuple[float, float, float]
) -> tuple[np.ndarray, np.ndarray]:
    """(precision, gradient of -log pi) of M1 in (alpha0, rho, eta) at the centering point."""
    a0, r, e = centering
    n = len(alpha)
    prev = np.concatenate(([a0], alpha[:-1]))
    resid = alpha - r * prev - (1.0 - r) * e
    lag = e - prev
    h = np.empty((3, 3))
    h[0, 0] = 1.0 + tau * r * r
    h[0, 1] = h[1, 0] = -tau * (alpha[0] - e + 2.0 * r * (e - a0))
    # exact d2(-log pi)/d alpha0 d eta; positive for 0 < rho < 1, zero at rho in {0, 1}
    h[0, 2] = h[2, 0] = tau * r * (1.0 - r)
    h[1, 1] = 1.0 + tau * float(np.dot(lag, lag))
    h[1, 2] = h[2, 1] = -tau * float(np.sum((1.0 - 2.0 * r) * lag + e - alpha))
    h[2, 2] = 1.0 + n * tau * (1.0 - r) ** 2
    grad = np.array(
        [
            a0 - tau * r * resid[0],
            r + tau * float(np.dot(lag, resid)),
            e - tau * (1.0 - r) * float(np.sum(resid)),
        ]
    )
    return h, grad


def _cholesky_or_none(matrix: np.ndarray) -> np.ndarray | None:
    try:
        chol = linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        return None
    if np.min(np.diag(chol)) ** 2 < PIVOT_TOLERANCE:
        return None
    return chol


def efficient_proposal_full(
    alpha: np.ndarray, tau: float, centering: tuple[float, float, float]
) -> EfficientProposal:
    """Second-order proposal for M1's (alpha0, rho, eta).

    Sigma^{-1} is minus the Hessian of log pi(M1) at the centering point and
    mu = c - Sigma g with g the gradient of -log pi there, so log pi - log q
    has zero first and second derivatives at c. When Sigma^{-1} is not
    positive definite the centering moves to :func:`centering_point` (chosen
    from rho~: 1 for M2 moves, 0 for M3 moves) and the off-diagonals are dropped.
    """
    if not tau > 0:
        msg = f"tau must be positive, got {tau!r}"
        raise ContractError(msg)
    alpha = np.asarray(alpha, dtype=float)
    c = tuple(float(v) for v in centering)
    precision, grad = _curvature(alpha, tau, c)  # type: ignore[arg-type]
    chol = _cholesky_or_none(precision)
    if chol is not None:
        sigma = linalg.cho_solve((chol, True), np.eye(3))
        sigma = 0.5 * (sigma + sigma.T)
        mu = np.asarray(c) - sigma @ grad
        return EfficientProposal(mu, sigma, False, c, precision)  # type: ignore[arg-type]

    if c[1] == 1.0:
        c = centering_point((ModelId.M2, ModelId.M1), alpha)
    elif c[1] == 0.0:
        c = centering_point((ModelId.M3, ModelId.M1), alpha)
    precision, grad = _curvature(alpha, tau, c)  # type: ignore[arg-type]
    diag = np.diag(precision).copy()
    precision = np.diag(diag)
    mu = np.asarray(c) - grad / diag
    return EfficientProposal(mu, np.diag(1.0 / diag), True, c, precision)  # type: ignore[arg-type]


def reduced_proposal(model: ModelId, alpha: np.ndarray, tau: float) -> NormalParams:
    """Exact conditional of alpha0' under M2 or eta'' under M3; free of any centering."""
    if not tau > 0:
        msg = f"tau must be positive, got {tau!r}"
        raise ContractError(msg)
    return reduced_conditional(ModelId(model), alpha, tau)


@dataclass(frozen=True)
class EfficientFamily:
    name: str = "efficient"

    def law(
        self, model: ModelId, counterpart: ModelId, alpha: np.ndarray, tau: float
    ) -> CoordinateLaw:
        model = ModelId(model)
        if model is ModelId.M1:
            move = (ModelId(counterpart), ModelId.M1)
            return efficient_proposal_full(alpha, tau, primary_centering(move, alpha, tau))
        return IndependentNormals((reduced_proposal(model, alpha, tau),))
