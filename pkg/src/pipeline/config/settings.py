"""Run configuration management."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from loss_ratio_rj.core.model import PriorConfig
from loss_ratio_rj.errors import ConfigError, ContractError, LossRatioError
from loss_ratio_rj.samplers.chain import ChainConfig
from loss_ratio_rj.samplers.marginal import MarginalPilotConfig
from loss_ratio_rj.samplers.proposals import MoveSpec, PilotConfig


@dataclass
class PriorSection:
    a1: float = 0.001
    b1: float = 0.001
    a2: float = 0.001
    b2: float = 0.001
    model_prior: list[float] = field(default_factory=lambda: [1 / 3, 1 / 3, 1 / 3])


@dataclass
class SamplerSection:
    iterations: int = 1_000_000
    burn_in: int = 10_000
    thin: int = 1
    seed: int = 0
    chains: int = 3
    workers: int = 1
    checkpoint_every: int = 1000
    hpd_level: float = 0.95
    max_lag: int = 50
    density_params: list[str] = field(default_factory=lambda: ["rho"])


@dataclass
class RjSection:
    scheme: str = "efficient"
    between_move_prob: float = 0.5
    r: list[list[float]] = field(
        default_factory=lambda: [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]]
    )
    pilot_iterations: int = 5000
    pilot_burn_in: int = 1000
    ks_params: list[str] = field(default_factory=lambda: ["sigma", "tau"])


@dataclass
class MarginalSection:
    gibbs_pilot_iterations: int = 5000
    gibbs_pilot_burn_in: int = 1000
    batches: int = 50
    batch_size: int = 100
    kappa: float = 0.5
    target_rho: float = 0.27
    target_eta: float = 0.15
    target_alpha0: float = 0.29
    target_alpha: float = 0.15


@dataclass
class SimulationSection:
    preset: str = "seven-year"
    replications: int = 20
    from_prior: bool = False
    sim_model: str = "m1"
    sim_n: int = 7


SECTIONS: dict[str, type] = {
    "prior": PriorSection,
    "sampler": SamplerSection,
    "rj": RjSection,
    "marginal": MarginalSection,
    "simulation": SimulationSection,
}


@dataclass
class RunConfig:
    """Configuration for one command invocation."""

    name: str = "loss-ratio-rj"
    data: Path | None = None
    output_dir: Path = field(default_factory=lambda: Path("loss-ratio-output"))
    fail_fast: bool = True
    use_cache: bool = True
    cache_dir: Path = field(default_factory=lambda: Path(".loss-ratio-cache"))

    prior: PriorSection = field(default_factory=PriorSection)
    sampler: SamplerSection = field(default_factory=SamplerSection)
    rj: RjSection = field(default_factory=RjSection)
    marginal: MarginalSection = field(default_factory=MarginalSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        data = dict(data)
        try:
            sections = {
                key: section(**data.pop(key, {})) for key, section in SECTIONS.items()
            }
            for key in ("data", "output_dir", "cache_dir"):
                if data.get(key) is not None:
                    data[key] = Path(data[key])
            return cls(**data, **sections)
        except TypeError as e:
            msg = f"Invalid configuration: {e}"
            raise ConfigError(msg) from e

    @classmethod
    def from_file(cls, config_path: Path) -> RunConfig:
        """Load configuration from JSON file; a missing file gives the defaults.

        A run's manifest.json is accepted too: its ``config`` entry is used.
        """
        if not config_path.exists():
            return cls()
        try:
            with config_path.open(encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            msg = f"Invalid configuration file: {e}"
            raise ConfigError(msg) from e
        if not isinstance(data, dict):
            msg = "Invalid configuration file: top level must be an object"
            raise ConfigError(msg)
        if "artifacts" in data and isinstance(data.get("config"), dict):
            data = data["config"]
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "data": str(self.data) if self.data is not None else None,
            "output_dir": str(self.output_dir),
            "fail_fast": self.fail_fast,
            "use_cache": self.use_cache,
            "cache_dir": str(self.cache_dir),
        }
        for key in SECTIONS:
            out[key] = dataclasses.asdict(getattr(self, key))
        return out

    def to_file(self, config_path: Path) -> None:
        """Save configuration to JSON file."""
        config_path.parent.mkdir(parents=True, exist_ok=True)
        with config_path.open("w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    def leaf_fields(self) -> dict[str, tuple[str, Any]]:
        """Every overridable leaf as ``name -> (section, current value)``."""
        leaves: dict[str, tuple[str, Any]] = {}
        for key in SECTIONS:
            section = getattr(self, key)
            for f in dataclasses.fields(section):
                leaves[f.name] = (key, getattr(section, f.name))
        return leaves

    def apply_overrides(self, overrides: dict[str, Any]) -> None:
        leaves = self.leaf_fields()
        for name, value in overrides.items():
            if value is None:
                continue
            if name not in leaves:
                msg = f"unknown configuration field {name!r}"
                raise ConfigError(msg)
            section, _ = leaves[name]
            if name == "r":
                value = np.asarray(value, dtype=float).reshape(3, 3).tolist()
            setattr(getattr(self, section), name, value)

    # -- typed views -----------------------------------------------------------

    def priors(self) -> PriorConfig:
        p = self.prior
        return PriorConfig(p.a1, p.b1, p.a2, p.b2, tuple(p.model_prior))  # type: ignore[arg-type]

    def chain_config(self, seed: int) -> ChainConfig:
        s = self.sampler
        return ChainConfig(iterations=s.iterations, burn_in=s.burn_in, seed=seed, thin=s.thin)

    def move_spec(self) -> MoveSpec:
        return MoveSpec(self.rj.between_move_prob, np.asarray(self.rj.r, dtype=float))

    def pilot_config(self) -> PilotConfig:
        return PilotConfig(self.rj.pilot_iterations, self.rj.pilot_burn_in, self.sampler.seed)

    def marginal_pilot(self) -> MarginalPilotConfig:
        m = self.marginal
        return MarginalPilotConfig(
            gibbs_iterations=m.gibbs_pilot_iterations,
            gibbs_burn_in=m.gibbs_pilot_burn_in,
            batches=m.batches,
            batch_size=m.batch_size,
            kappa=m.kappa,
            seed=self.sampler.seed,
            target_rates={
                "rho": m.target_rho,
                "eta": m.target_eta,
                "alpha0": m.target_alpha0,
                "alpha": m.target_alpha,
            },
        )

    def chain_seeds(self) -> list[int]:
        """Independent 64-bit seeds, one per chain, spawned from ``sampler.seed``."""
        children = np.random.SeedSequence(self.sampler.seed).spawn(self.sampler.chains)
        return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]

    def validate(self) -> None:
        """Check every precondition before any sampling starts."""
        s = self.sampler
        if s.chains < 1 or s.workers < 1:
            msg = "chains and workers must be >= 1"
            raise ConfigError(msg)
        if s.checkpoint_every < 1 or s.max_lag < 1:
            msg = "checkpoint_every and max_lag must be >= 1"
            raise ConfigError(msg)
        if not 0.0 < s.hpd_level < 1.0:
            msg = f"hpd_level must lie in (0, 1), got {s.hpd_level}"
            raise ConfigError(msg)
        if self.rj.scheme not in {"vanilla", "efficient"}:
            msg = f"scheme must be vanilla or efficient, got {self.rj.scheme!r}"
            raise ConfigError(msg)
        if self.simulation.replications < 1:
            msg = "replications must be >= 1"
            raise ConfigError(msg)
        try:
            self.priors()
            self.chain_config(0)
            self.move_spec()
            self.marginal_pilot()
            ChainConfig(self.rj.pilot_iterations, self.rj.pilot_burn_in)
            ChainConfig(self.marginal.gibbs_pilot_iterations, self.marginal.gibbs_pilot_burn_in)
        except ContractError as e:
            raise ConfigError(str(e)) from e
        except LossRatioError:
            raise
        except (TypeError, ValueError) as e:
            msg = f"Invalid configuration: {e}"
            raise ConfigError(msg) from e
