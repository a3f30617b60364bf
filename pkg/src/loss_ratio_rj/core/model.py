"""Data model, priors and unnormalised log densities for the loss-ratio models.

Three nested models share the observation layer

    R_j ~ N(alpha_j, (sigma E_j)^-1),  j = 1..n

and differ in the latent process:

    M1: alpha_j ~ N(rho alpha_{j-1} + (1 - rho) eta, tau^-1)
    M2: rho fixed at 1, no eta        (random walk from alpha_0)
    M3: rho fixed at 0, no alpha_0    (exchangeable around eta)

sigma and tau are precisions. alpha_0, rho and eta carry N(0, 1) priors,
sigma ~ Gamma(a1, b1) and tau ~ Gamma(a2, b2) in the rate parameterisation.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Any

import numpy as np

from loss_ratio_rj.core.densities import LOG_2PI, gamma_logpdf, std_normal_logpdf
from loss_ratio_rj.errors import ContractError, DataError

logger = logging.getLogger(__name__)


class ModelId(IntEnum):
    M1 = 1
    M2 = 2
    M3 = 3

    @property
    def label(self) -> str:
        return f"m{int(self)}"

    @classmethod
    def from_label(cls, label: str | int) -> ModelId:
        text = str(label).strip().lower().lstrip("m")
        try:
            return cls(int(text))
        except ValueError as exc:
            msg = f"unknown model {label!r}; expected one of m1, m2, m3"
            raise ContractError(msg) from exc

    @property
    def has_alpha0(self) -> bool:
        return self is not ModelId.M3

    @property
    def has_eta(self) -> bool:
        return self is not ModelId.M2

    @property
    def free_rho(self) -> bool:
        return self is ModelId.M1

    @property
    def fixed_rho(self) -> float | None:
        return {ModelId.M1: None, ModelId.M2: 1.0, ModelId.M3: 0.0}[self]

    def parameters(self, n: int) -> tuple[str, ...]:
        """Free parameter names in canonical column order."""
        names: list[str] = []
        if self.has_alpha0:
            names.append("alpha0")
        names.extend(f"alpha{j}" for j in range(1, n + 1))
        if self.free_rho:
            names.append("rho")
        if self.has_eta:
            names.append("eta")
        names.extend(("sigma", "tau"))
        return tuple(names)


def parameter_columns(n: int) -> tuple[str, ...]:
    """Union of all models' parameter names, the chain CSV column order."""
    return ("alpha0", *(f"alpha{j}" for j in range(1, n + 1)), "rho", "eta", "sigma", "tau")


def _frozen_array(values: Iterable[float] | np.ndarray, dtype: type = float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """Loss counts and exposures in time order, with ratios computed once."""

    year: np.ndarray
    loss: np.ndarray
    exposure: np.ndarray
    ratio: np.ndarray

    def __post_init__(self) -> None:
        for name in ("loss", "exposure", "ratio"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        object.__setattr__(self, "year", _frozen_array(self.year, dtype=int))
        sizes = {len(self.year), len(self.loss), len(self.exposure), len(self.ratio)}
        if len(sizes) != 1:
            msg = "year, loss, exposure and ratio must have equal length"
            raise DataError(msg)
        if self.n < 2:  # noqa: PLR2004
            msg = f"need at least 2 observations, got {self.n}"
            raise DataError(msg)
        bad = np.flatnonzero(~(self.exposure > 0))
        if bad.size:
            msg = f"exposure must be positive, got {self.exposure[bad[0]]!r}"
            raise DataError(msg, row=int(bad[0]))
        if not np.allclose(self.ratio * self.exposure, self.loss, rtol=1e-9, atol=1e-12):
            msg = "ratio * exposure does not reproduce loss"
            raise DataError(msg)

    @property
    def n(self) -> int:
        return len(self.ratio)

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratio))

    def rows(self) -> list[tuple[int, float, float]]:
        return [
            (int(y), float(loss), float(e))
            for y, loss, e in zip(self.year, self.loss, self.exposure, strict=True)
        ]

    def to_csv(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("year", "loss", "exposure"))
            for year, loss, exposure in self.rows():
                writer.writerow((year, repr(loss), repr(exposure)))
        return path

    @classmethod
    def read_csv(cls, path: Path) -> ObservationSeries:
        """Read a ``year,loss,exposure`` CSV (UTF-8, '.' decimal separator)."""
        try:
            with path.open(newline="", encoding="utf-8") as fh:
                reader = csv.DictReader(fh)
                missing = {"year", "loss", "exposure"} - set(reader.fieldnames or ())
                if missing:
                    msg = f"{path}: missing column(s) {sorted(missing)}"
                    raise DataError(msg)
                rows: list[tuple[Any, Any, Any]] = [
                    (rec["year"], rec["loss"], rec["exposure"]) for rec in reader
                ]
        except OSError as exc:
            msg = f"cannot read data file {path}: {exc}"
            raise DataError(msg) from exc
        return load_series(rows)


def load_series(rows: Sequence[tuple[Any, Any, Any]]) -> ObservationSeries:
    """Build an ObservationSeries from ``(year, loss, exposure)`` rows.

    Row order is time order. Negative losses are accepted with a warning:
    the normal observation model has support on the whole line.
    """
    if len(rows) < 2:  # noqa: PLR2004
        msg = f"need at least 2 rows, got {len(rows)}"
        raise DataError(msg)
    years: list[int] = []
    losses: list[float] = []
    exposures: list[float] = []
    for i, row in enumerate(rows):
        try:
            year, loss, exposure = row
            years.append(int(year))
            losses.append(float(loss))
            exposures.append(float(exposure))
        except (TypeError, ValueError) as exc:
            msg = f"malformed row {row!r}: {exc}"
            raise DataError(msg, row=i) from exc
        if not exposures[-1] > 0:
            msg = f"exposure must be positive, got {exposures[-1]!r}"
            raise DataError(msg, row=i)
        if losses[-1] < 0:
            logger.warning("row %d: negative loss %r", i, losses[-1])
    loss_arr = np.asarray(losses)
    exposure_arr = np.asarray(exposures)
    return ObservationSeries(
        year=np.asarray(years),
        loss=loss_arr,
        exposure=exposure_arr,
        ratio=loss_arr / exposure_arr,
    )


@dataclass(frozen=True)
class PriorConfig:
    """Gamma hyperparameters for sigma (a1, b1) and tau (a2, b2), plus p(M_i)."""

    a1: float = 0.001
    b1: float = 0.001
    a2: float = 0.001
    b2: float = 0.001
    model_prior: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self) -> None:
        object.__setattr__(self, "model_prior", tuple(float(p) for p in self.model_prior))
        for name in ("a1", "b1", "a2", "b2"):
            value = getattr(self, name)
            if not value > 0:
                msg = f"{name} must be positive, got {value!r}"
                raise ContractError(msg)
        if len(self.model_prior) != len(ModelId):
            msg = "model_prior needs one probability per model"
            raise ContractError(msg)
        if any(p < 0 for p in self.model_prior) or abs(sum(self.model_prior) - 1.0) > 1e-12:
            msg = f"model_prior must be a probability vector, got {self.model_prior}"
            raise ContractError(msg)

    def log_model_prior(self, model: ModelId) -> float:
        p = self.model_prior[int(model) - 1]
        return math.log(p) if p > 0 else -math.inf

    def to_dict(self) -> dict[str, Any]:
        return {
            "a1": self.a1,
            "b1": self.b1,
            "a2": self.a2,
            "b2": self.b2,
            "model_prior": list(self.model_prior),
        }


@dataclass(frozen=True, eq=False)
class ParamState:
    """Parameter vector of one model.

    ``alpha`` holds alpha_1..alpha_n. Under M2 ``rho`` is 1 and ``eta`` is None;
    under M3 ``rho`` is 0 and ``alpha0`` is None. sigma and tau are not
    validated here so that densities can report -inf outside the support.
    """

    model: ModelId
    alpha: np.ndarray
    alpha0: float | None = None
    rho: float = field(default=0.0)
    eta: float | None = None
    sigma: float = 1.0
    tau: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", ModelId(self.model))
        object.__setattr__(self, "alpha", _frozen_array(self.alpha))
        model = self.model
        if model.has_alpha0 != (self.alpha0 is not None):
            msg = f"{model.name} {'requires' if model.has_alpha0 else 'has no'} alpha0"
            raise ContractError(msg)
        if model.has_eta != (self.eta is not None):
            msg = f"{model.name} {'requires' if model.has_eta else 'has no'} eta"
            raise ContractError(msg)
        if model.fixed_rho is not None and self.rho != model.fixed_rho:
            msg = f"{model.name} fixes rho at {model.fixed_rho}, got {self.rho!r}"
            raise ContractError(msg)

    @classmethod
    def for_model(
        cls,
        model: ModelId,
        alpha: Iterable[float] | np.ndarray,
        *,
        alpha0: float | None = None,
        rho: float | None = None,
        eta: float | None = None,
        sigma: float = 1.0,
        tau: float = 1.0,
    ) -> ParamState:
        """Build a state, dropping the fields ``model`` does not carry."""
        model = ModelId(model)
        fixed = model.fixed_rho
        return cls(
            model=model,
            alpha=np.asarray(alpha, dtype=float),
            alpha0=float(alpha0 if alpha0 is not None else 0.0) if model.has_alpha0 else None,
            rho=fixed if fixed is not None else float(rho if rho is not None else 0.0),
            eta=float(eta if eta is not None else 0.0) if model.has_eta else None,
            sigma=float(sigma),
            tau=float(tau),
        )

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def dimension(self) -> int:
        return len(self.model.parameters(self.n))

    def replace(self, **changes: Any) -> ParamState:
        return dataclasses.replace(self, **changes)

    def previous_alpha(self) -> np.ndarray:
        """alpha_{j-1} for j = 1..n; the alpha_0 slot is 0 under M3 (unused, rho = 0)."""
        first = self.alpha0 if self.alpha0 is not None else 0.0
        return np.concatenate(([first], self.alpha[:-1]))

    def process_mean(self) -> np.ndarray:
        """Prior mean rho alpha_{j-1} + (1 - rho) eta of each alpha_j."""
        eta = self.eta if self.eta is not None else 0.0
        return self.rho * self.previous_alpha() + (1.0 - self.rho) * eta

    def values(self) -> dict[str, float | None]:
        """Every column of the shared chain schema; absent parameters are None."""
        out: dict[str, float | None] = {"alpha0": self.alpha0}
        out.update({f"alpha{j}": float(a) for j, a in enumerate(self.alpha, start=1)})
        out["rho"] = self.rho if self.model.free_rho else None
        out["eta"] = self.eta
        out["sigma"] = self.sigma
        out["tau"] = self.tau
        return out

    def free_vector(self) -> np.ndarray:
        vals = self.values()
        return np.array([vals[name] for name in self.model.parameters(self.n)], dtype=float)

    def shares_with(self, other: ParamState) -> bool:
        """True when alpha_1..alpha_n, sigma and tau are identical."""
        return (
            np.array_equal(self.alpha, other.alpha)
            and self.sigma == other.sigma
            and self.tau == other.tau
        )


def log_joint(state: ParamState, data: ObservationSeries, priors: PriorConfig) -> float:
    """Unnormalised log posterior of ``(M_i, theta_i)`` including log p(M_i)."""
    sigma, tau = state.sigma, state.tau
    if not (sigma > 0 and tau > 0):
        return -math.inf
    if state.n != data.n:
        msg = f"state has {state.n} alphas, data has {data.n} observations"
        raise ContractError(msg)
    n = data.n
    resid = data.ratio - state.alpha
    loglik = 0.5 * (
        float(np.sum(np.log(sigma * data.exposure)))
        - n * LOG_2PI
        - sigma * float(np.dot(data.exposure, resid * resid))
    )
    innov = state.alpha - state.process_mean()
    logproc = 0.5 * (n * math.log(tau) - n * LOG_2PI - tau * float(np.dot(innov, innov)))
    logprior = gamma_logpdf(sigma, priors.a1, priors.b1) + gamma_logpdf(tau, priors.a2, priors.b2)
    if state.alpha0 is not None:
        logprior += std_normal_logpdf(state.alpha0)
    if state.model.free_rho:
        logprior += std_normal_logpdf(state.rho)
    if state.eta is not None:
        logprior += std_normal_logpdf(state.eta)
    return loglik + logproc + logprior + priors.log_model_prior(state.model)


def log_marginal_target(
    alpha0: float,
    alpha: np.ndarray,
    rho: float,
    eta: float,
    data: ObservationSeries,
    priors: PriorConfig,
) -> float:
    """M1 log posterior with sigma and tau integrated out, up to a constant."""
    alpha = np.asarray(alpha, dtype=float)
    n = data.n
    resid = alpha - data.ratio
    prev = np.concatenate(([alpha0], alpha[:-1]))
    innov = alpha - rho * prev - (1.0 - rho) * eta
    obs_term = priors.b1 + 0.5 * float(np.dot(data.exposure, resid * resid))
    proc_term = priors.b2 + 0.5 * float(np.dot(innov, innov))
    return (
        std_normal_logpdf(rho)
        + std_normal_logpdf(eta)
        + std_normal_logpdf(alpha0)
        - (priors.a1 + 0.5 * n) * math.log(obs_term)
        - (priors.a2 + 0.5 * n) * math.log(proc_term)
    )
