"""Multi-chain convergence checks for trans-dimensional runs.

At each checkpoint the cumulative draws of every chain are compared: a chi-square
homogeneity test on model-visit counts, and pairwise two-sample
Kolmogorov-Smirnov tests on the model indicator or a named parameter.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats

from loss_ratio_rj.errors import ContractError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiagnosticTrace:
    test: str
    checkpoints: tuple[int, ...]
    statistics: tuple[float, ...]
    pvalues: tuple[float, ...]
    num_chains: int

    def __post_init__(self) -> None:
        if self.num_chains < 2:  # noqa: PLR2004
            msg = "diagnostics need at least two chains"
            raise ContractError(msg)
        if any(b <= a for a, b in itertools.pairwise(self.checkpoints)):
            msg = "checkpoints must be strictly increasing"
            raise ContractError(msg)
        if not all(0.0 <= p <= 1.0 for p in self.pvalues):
            msg = "p-values must lie in [0, 1]"
            raise ContractError(msg)

    def rows(self) -> list[tuple[int, str, float, float]]:
        """(checkpoint, statistic, value, p-value) rows for diag.csv."""
        return [
            (cp, self.test, stat, p)
            for cp, stat, p in zip(self.checkpoints, self.statistics, self.pvalues, strict=True)
        ]


def default_checkpoints(length: int, every: int = 1000) -> list[int]:
    if length < 1:
        msg = "chains are empty"
        raise ContractError(msg)
    points = list(range(every, length + 1, every))
    return points or [length]


def _check(chains: Sequence[np.ndarray], checkpoints: Sequence[int]) -> list[int]:
    if len(chains) < 2:  # noqa: PLR2004
        msg = f"need at least two chains, got {len(chains)}"
        raise ContractError(msg)
    shortest = min(len(c) for c in chains)
    cps = [int(c) for c in checkpoints]
    if not cps or cps[0] < 1 or cps[-1] > shortest:
        msg = f"checkpoints must lie in 1..{shortest}"
        raise ContractError(msg)
    return cps


def chisq_convergence(
    chains: Sequence[Sequence[int]], checkpoints: Sequence[int]
) -> DiagnosticTrace:
    """Chi-square homogeneity of cumulative model-visit counts across chains.

    Columns with no visits are dropped; with at most one visited model the
    p-value is 1.
    """
    arrays = [np.asarray(c, dtype=np.int64) for c in chains]
    cps = _check(arrays, checkpoints)
    statistics: list[float] = []
    pvalues: list[float] = []
    for cp in cps:
        table = np.stack([np.bincount(a[:cp] - 1, minlength=3)[:3] for a in arrays])
        table = table[:, table.sum(axis=0) > 0]
        if table.shape[1] <= 1:
            statistics.append(0.0)
            pvalues.append(1.0)
            continue
        result = stats.chi2_contingency(table, correction=False)
        statistics.append(float(result.statistic))
        pvalues.append(float(np.clip(result.pvalue, 0.0, 1.0)))
    return DiagnosticTrace("chisq", tuple(cps), tuple(statistics), tuple(pvalues), len(arrays))


def ks_convergence(
    chains: Sequence[np.ndarray], checkpoints: Sequence[int], functional: str = "model"
) -> DiagnosticTrace:
    """Smallest pairwise two-sample KS p-value (with the largest statistic) per checkpoint.

    ``chains`` holds the values of ``functional`` per chain; NaN entries
    (parameter absent in the visited model) are ignored.
    """
    arrays = [np.asarray(c, dtype=float) for c in chains]
    cps = _check(arrays, checkpoints)
    statistics: list[float] = []
    pvalues: list[float] = []
    for cp in cps:
        worst_p, worst_d = 1.0, 0.0
        for a, b in itertools.combinations(arrays, 2):
            x, y = a[:cp], b[:cp]
            x, y = x[~np.isnan(x)], y[~np.isnan(y)]
            if x.size == 0 or y.size == 0:
                continue
            result = stats.ks_2samp(x, y)
            if result.pvalue < worst_p or (result.pvalue == worst_p and result.statistic > worst_d):
                worst_p, worst_d = float(result.pvalue), float(result.statistic)
        statistics.append(worst_d)
        pvalues.append(float(np.clip(worst_p, 0.0, 1.0)))
    return DiagnosticTrace(
        f"ks_{functional}", tuple(cps), tuple(statistics), tuple(pvalues), len(arrays)
    )
