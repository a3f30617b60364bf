"""Forward simulation from M1, M2 and M3, prior draws and the recovery study."""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, cast

import numpy as np

from loss_ratio_rj.analysis.hpd import hpd_shortest
from loss_ratio_rj.core.model import ModelId, ObservationSeries, ParamState, PriorConfig
from loss_ratio_rj.errors import ConfigError, ContractError
from loss_ratio_rj.samplers.chain import ChainConfig
from loss_ratio_rj.samplers.proposals import MoveSpec, PilotConfig, pilot_tune
from loss_ratio_rj.samplers.rjmcmc import Scheme, run_rj

logger = logging.getLogger(__name__)

SCALAR_PARAMETERS = ("alpha0", "rho", "eta", "sigma", "tau")


def _presets_path() -> Path:
    return Path(__file__).resolve().parent / "data" / "presets.json"


def load_presets() -> dict[str, Mapping[str, Any]]:
    """Simulation presets keyed by id."""
    try:
        raw: object = json.loads(_presets_path().read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        msg = f"cannot read simulation presets: {exc}"
        raise ConfigError(msg) from exc
    items = cast("dict[str, Any]", raw).get("simulations", []) if isinstance(raw, dict) else []
    return {str(item["id"]): item for item in items if isinstance(item, Mapping) and "id" in item}


def preset(name: str) -> Mapping[str, Any]:
    presets = load_presets()
    if name not in presets:
        msg = f"unknown preset {name!r}; available: {sorted(presets)}"
        raise ConfigError(msg)
    return presets[name]


@dataclass(frozen=True, eq=False)
class SimulationSpec:
    """Truth and design of one synthetic dataset.

    ``true_params.alpha`` is a placeholder of length n: the alpha path is drawn
    forward from the process equation.
    """

    model: ModelId
    true_params: ParamState
    exposures: np.ndarray
    seed: int = 0

    def __post_init__(self) -> None:
        exposures = np.array(self.exposures, dtype=float)
        if exposures.ndim != 1 or np.any(exposures <= 0):
            msg = "exposures must be a vector of positive values"
            raise ContractError(msg)
        if ModelId(self.model) is not self.true_params.model:
            owner, wanted = self.true_params.model.name, ModelId(self.model).name
            msg = f"true_params belong to {owner}, not {wanted}"
            raise ContractError(msg)
        if self.true_params.n != exposures.size:
            msg = "true_params and exposures disagree on n"
            raise ContractError(msg)
        if not (self.true_params.sigma > 0 and self.true_params.tau > 0):
            msg = "sigma and tau must be positive"
            raise ContractError(msg)
        exposures.setflags(write=False)
        object.__setattr__(self, "model", ModelId(self.model))
        object.__setattr__(self, "exposures", exposures)

    @property
    def n(self) -> int:
        return self.exposures.size

    @classmethod
    def build(
        cls,
        model: ModelId,
        exposures: np.ndarray,
        *,
        alpha0: float = 0.0,
        rho: float = 0.0,
        eta: float = 0.0,
        sigma: float = 1.0,
        tau: float = 1.0,
        seed: int = 0,
    ) -> SimulationSpec:
        exposures = np.asarray(exposures, dtype=float)
        truth = ParamState.for_model(
            model, np.zeros(exposures.size), alpha0=alpha0, rho=rho, eta=eta, sigma=sigma, tau=tau
        )
        return cls(ModelId(model), truth, exposures, seed)

    @classmethod
    def from_preset(cls, name: str, seed: int = 0) -> SimulationSpec:
        item = preset(name)
        model = ModelId.from_label(item["model"])
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
        exposures = default_exposures(int(item["n"]), float(item.get("exposure_scale", 1.0)), rng)
        params = {k: float(v) for k, v in item.get("params", {}).items()}
        return cls.build(model, exposures, seed=seed, **params)


def default_exposures(
    n: int, scale: float = 1.0, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Log-uniform over one decade centred (geometrically) on ``scale``."""
    rng = rng or np.random.default_rng(0)
    return scale * 10.0 ** rng.uniform(-0.5, 0.5, size=n)


def draw_alpha_path(state: ParamState, rng: np.random.Generator) -> np.ndarray:
    """alpha_j = rho alpha_{j-1} + (1 - rho) eta + N(0, 1/tau), j = 1..n."""
    prev = state.alpha0 if state.alpha0 is not None else 0.0
    drift = (1.0 - state.rho) * (state.eta if state.eta is not None else 0.0)
    shocks = rng.normal(0.0, 1.0 / np.sqrt(state.tau), size=state.n)
    alpha = np.empty(state.n)
    for j in range(state.n):
        prev = state.rho * prev + drift + shocks[j]
        alpha[j] = prev
    return alpha


def draw_ratios(state: ParamState, exposures: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """R_j ~ N(alpha_j, 1/(sigma E_j))."""
    return state.alpha + rng.normal(0.0, 1.0, size=state.n) / np.sqrt(state.sigma * exposures)


def series_from_ratios(ratios: np.ndarray, exposures: np.ndarray) -> ObservationSeries:
    exposures = np.asarray(exposures, dtype=float)
    return ObservationSeries(
        year=np.arange(1, exposures.size + 1),
        loss=ratios * exposures,
        exposure=exposures,
        ratio=np.asarray(ratios, dtype=float),
    )


def simulate_with_truth(spec: SimulationSpec) -> tuple[ObservationSeries, ParamState]:
    rng = np.random.default_rng(spec.seed)
    truth = spec.true_params.replace(alpha=draw_alpha_path(spec.true_params, rng))
    ratios = draw_ratios(truth, spec.exposures, rng)
    return series_from_ratios(ratios, spec.exposures), truth


def simulate_dataset(spec: SimulationSpec) -> ObservationSeries:
    return simulate_with_truth(spec)[0]


def draw_from_prior(
    model: ModelId, n: int, priors: PriorConfig, rng: np.random.Generator
) -> ParamState:
    """Parameters of ``model`` drawn from the prior, alpha path included."""
    model = ModelId(model)
    base = ParamState.for_model(
        model,
        np.zeros(n),
        alpha0=rng.standard_normal(),
        rho=rng.standard_normal(),
        eta=rng.standard_normal(),
        sigma=rng.gamma(priors.a1, 1.0 / priors.b1),
        tau=rng.gamma(priors.a2, 1.0 / priors.b2),
    )
    return base.replace(alpha=draw_alpha_path(base, rng))


def truth_to_dict(truth: ParamState, spec: SimulationSpec) -> dict[str, Any]:
    """Ground-truth sidecar written next to a simulated CSV."""
    return {
        "model": truth.model.label,
        "seed": spec.seed,
        "parameters": truth.values(),
        "exposures": spec.exposures.tolist(),
    }


@dataclass(frozen=True)
class RecoveryFitConfig:
    chain: ChainConfig
    priors: PriorConfig = field(default_factory=PriorConfig)
    move_spec: MoveSpec = field(default_factory=MoveSpec)
    scheme: Scheme = "efficient"
    pilot: PilotConfig = field(default_factory=PilotConfig)
    level: float = 0.95


@dataclass
class RecoveryReport:
    true_model: ModelId
    replications: int
    argmax_counts: dict[ModelId, int]
    coverage: dict[str, float]
    runs: list[dict[str, Any]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "true_model": self.true_model.label,
            "replications": self.replications,
            "argmax_counts": {m.label: c for m, c in self.argmax_counts.items()},
            "coverage": dict(self.coverage),
            "runs": self.runs,
        }


def _seed_of(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _one_replication(
    spec: SimulationSpec, fit: RecoveryFitConfig, pilot_seed: int, chain_seed: int
) -> dict[str, Any]:
    data, truth = simulate_with_truth(spec)
    spec_vanilla = None
    if fit.scheme == "vanilla":
        pilot = PilotConfig(fit.pilot.iterations, fit.pilot.burn_in, pilot_seed)
        spec_vanilla = pilot_tune(data, fit.priors, pilot)
    chain_cfg = ChainConfig(fit.chain.iterations, fit.chain.burn_in, chain_seed, fit.chain.thin)
    record = run_rj(data, fit.priors, chain_cfg, fit.move_spec, fit.scheme, spec_vanilla)
    probs = record.model_probabilities()
    best = max(ModelId, key=lambda m: (probs[m], -int(m)))
    covered: dict[str, bool] = {}
    conditional = record.select(truth.model)
    values = truth.values()
    for name in SCALAR_PARAMETERS:
        true_value = values[name]
        if true_value is None or (name == "rho" and not truth.model.free_rho):
            continue
        draws = conditional.column(name) if len(conditional) else np.array([])
        covered[name] = bool(
            draws.size and hpd_shortest(draws, fit.level).contains(float(true_value))
        )
    return {
        "seed": spec.seed,
        "argmax_model": best.label,
        "model_probabilities": {m.label: p for m, p in probs.items()},
        "covered": covered,
    }


def recovery_study(
    model: ModelId,
    true_params: ParamState,
    replications: int,
    fit_config: RecoveryFitConfig,
    *,
    exposures: np.ndarray | None = None,
    seed: int = 0,
    workers: int = 1,
) -> RecoveryReport:
    """Simulate, fit by reversible jump and score model choice and HPD coverage."""
    if replications < 1:
        msg = f"replications must be >= 1, got {replications}"
        raise ContractError(msg)
    model = ModelId(model)
    children = np.random.SeedSequence(seed).spawn(replications)
    jobs = []
    for child in children:
        data_seq, pilot_seq, chain_seq, exposure_seq = child.spawn(4)
        design = (
            np.asarray(exposures, dtype=float)
            if exposures is not None
            else default_exposures(true_params.n, 1.0, np.random.default_rng(exposure_seq))
        )
        spec = SimulationSpec(model, true_params, design, _seed_of(data_seq))
        jobs.append((spec, fit_config, _seed_of(pilot_seq), _seed_of(chain_seq)))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_one_replication, *zip(*jobs, strict=True)))
    else:
        runs = [_one_replication(*job) for job in jobs]

    counts = dict.fromkeys(ModelId, 0)
    for run in runs:
        counts[ModelId.from_label(run["argmax_model"])] += 1
    names = sorted({k for run in runs for k in run["covered"]}, key=SCALAR_PARAMETERS.index)
    coverage = {
        name: sum(run["covered"].get(name, False) for run in runs) / replications for name in names
    }
    logger.info(
        "recovery %s: argmax counts %s",
        model.name,
        {m.label: c for m, c in counts.items()},
    )
    return RecoveryReport(model, replications, counts, coverage, runs)
