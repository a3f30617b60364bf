"""Chain configuration and the iteration-indexed trace shared by all samplers."""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from loss_ratio_rj.core.model import ModelId, ParamState, parameter_columns
from loss_ratio_rj.errors import ConfigError, DataError


@dataclass(frozen=True)
class ChainConfig:
    iterations: int
    burn_in: int = 0
    seed: int = 0
    thin: int = 1

    def __post_init__(self) -> None:
        if self.iterations < 1:
            msg = f"iterations must be positive, got {self.iterations}"
            raise ConfigError(msg)
        if not 0 <= self.burn_in < self.iterations:
            msg = f"burn_in must lie in [0, iterations), got {self.burn_in}"
            raise ConfigError(msg)
        if self.thin < 1:
            msg = f"thin must be >= 1, got {self.thin}"
            raise ConfigError(msg)
        if not 0 <= self.seed < 2**64:
            msg = "seed must be a 64-bit unsigned integer"
            raise ConfigError(msg)

    @property
    def retained(self) -> int:
        return (self.iterations - self.burn_in) // self.thin

    def keeps(self, iteration: int) -> bool:
        """Whether 1-based ``iteration`` is retained."""
        offset = iteration - self.burn_in
        return offset > 0 and offset % self.thin == 0

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


class ChainRecorder:
    """Preallocated writer for the retained part of a run."""

    def __init__(self, n: int, config: ChainConfig, sampler: str) -> None:
        self.n = n
        self.config = config
        self.sampler = sampler
        size = config.retained
        self._iterations = np.zeros(size, dtype=np.int64)
        self._models = np.zeros(size, dtype=np.int8)
        self._values = np.full((size, n + 5), np.nan)
        self._cursor = 0

    def offer(self, iteration: int, state: ParamState) -> None:
        if not self.config.keeps(iteration):
            return
        k = self._cursor
        self._iterations[k] = iteration
        self._models[k] = int(state.model)
        row = self._values[k]
        if state.alpha0 is not None:
            row[0] = state.alpha0
        row[1 : self.n + 1] = state.alpha
        if state.model.free_rho:
            row[self.n + 1] = state.rho
        if state.eta is not None:
            row[self.n + 2] = state.eta
        row[self.n + 3] = state.sigma
        row[self.n + 4] = state.tau
        self._cursor += 1

    def offer_marginal(
        self, iteration: int, alpha0: float, alpha: np.ndarray, rho: float, eta: float
    ) -> None:
        """Record an M1 draw of the sampler with sigma and tau integrated out."""
        if not self.config.keeps(iteration):
            return
        k = self._cursor
        self._iterations[k] = iteration
        self._models[k] = int(ModelId.M1)
        self._values[k, 0] = alpha0
        self._values[k, 1 : self.n + 1] = alpha
        self._values[k, self.n + 1] = rho
        self._values[k, self.n + 2] = eta
        self._cursor += 1

    def finish(self, meta: dict[str, Any] | None = None) -> ChainRecord:
        k = self._cursor
        return ChainRecord(
            n=self.n,
            iterations=self._iterations[:k].copy(),
            models=self._models[:k].copy(),
            values=self._values[:k].copy(),
            sampler=self.sampler,
            seed=self.config.seed,
            meta=dict(meta or {}),
        )


@dataclass
class ChainRecord:
    """Retained draws: iteration index, model id and the full parameter row.

    Parameters absent from the visited model are NaN.
    """

    n: int
    iterations: np.ndarray
    models: np.ndarray
    values: np.ndarray
    sampler: str = "gibbs"
    seed: int | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def columns(self) -> tuple[str, ...]:
        return parameter_columns(self.n)

    def __len__(self) -> int:
        return len(self.iterations)

    def column(self, name: str) -> np.ndarray:
        try:
            idx = self.columns.index(name)
        except ValueError as exc:
            msg = f"unknown parameter {name!r}"
            raise KeyError(msg) from exc
        return self.values[:, idx]

    def snapshot(self, i: int) -> ParamState:
        model = ModelId(int(self.models[i]))
        row = self.values[i]
        n = self.n
        return ParamState.for_model(
            model,
            row[1 : n + 1],
            alpha0=float(row[0]),
            rho=float(row[n + 1]),
            eta=float(row[n + 2]),
            sigma=float(row[n + 3]),
            tau=float(row[n + 4]),
        )

    def select(self, model: ModelId) -> ChainRecord:
        mask = self.models == int(model)
        return ChainRecord(
            n=self.n,
            iterations=self.iterations[mask],
            models=self.models[mask],
            values=self.values[mask],
            sampler=self.sampler,
            seed=self.seed,
            meta=self.meta,
        )

    def model_probabilities(self) -> dict[ModelId, float]:
        """Visit frequencies of each model over the retained draws."""
        total = len(self)
        counts = np.bincount(self.models.astype(np.int64), minlength=len(ModelId) + 1)
        return {m: (float(counts[int(m)]) / total if total else 0.0) for m in ModelId}

    @classmethod
    def concatenate(cls, records: Sequence[ChainRecord]) -> ChainRecord:
        if not records:
            msg = "nothing to concatenate"
            raise ValueError(msg)
        first = records[0]
        return cls(
            n=first.n,
            iterations=np.concatenate([r.iterations for r in records]),
            models=np.concatenate([r.models for r in records]),
            values=np.vstack([r.values for r in records]),
            sampler=first.sampler,
            seed=None,
            meta={},
        )

    def to_csv(self, path: Path) -> Path:
        """``iteration,model,alpha0,...,tau``; empty cells for absent parameters."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("iteration", "model", *self.columns))
            for it, model, row in zip(self.iterations, self.models, self.values, strict=True):
                cells = ["" if math.isnan(v) else repr(float(v)) for v in row]
                writer.writerow((int(it), int(model), *cells))
        return path

    @classmethod
    def from_csv(cls, path: Path, sampler: str = "unknown") -> ChainRecord:
        try:
            with path.open(newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                body = list(reader)
        except (OSError, StopIteration) as exc:
            msg = f"cannot read chain file {path}: {exc}"
            raise DataError(msg) from exc
        n = len(header) - 2 - 5
        expected = ["iteration", "model", *parameter_columns(n)] if n >= 1 else None
        if header != expected:
            msg = f"{path}: unexpected chain header {header}"
            raise DataError(msg)
        iterations = np.array([int(r[0]) for r in body], dtype=np.int64)
        models = np.array([int(r[1]) for r in body], dtype=np.int8)
        values = np.array(
            [[float(c) if c != "" else np.nan for c in r[2:]] for r in body], dtype=float
        ).reshape(len(body), n + 5)
        return cls(n=n, iterations=iterations, models=models, values=values, sampler=sampler)
