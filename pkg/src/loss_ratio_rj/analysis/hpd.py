"""Highest posterior density intervals and regions from posterior draws."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from loss_ratio_rj.errors import ContractError

logger = logging.getLogger(__name__)

HpdMethod = Literal["shortest_interval", "kde_threshold"]
KDE_GRID_SIZE = 1024
_BISECTION_STEPS = 80


@dataclass(frozen=True)
class HpdResult:
    level: float
    intervals: tuple[tuple[float, float], ...]
    method: HpdMethod
    coverage: float = math.nan

    def __post_init__(self) -> None:
        flat = [v for pair in self.intervals for v in pair]
        if not self.intervals or any(b < a for a, b in zip(flat, flat[1:], strict=False)):
            msg = "HPD intervals must be nonempty, disjoint and sorted"
            raise ContractError(msg)

    @property
    def lower(self) -> float:
        return self.intervals[0][0]

    @property
    def upper(self) -> float:
        return self.intervals[-1][1]

    def contains(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def to_dict(self) -> dict[str, object]:
        return {
            "level": self.level,
            "method": self.method,
            "intervals": [list(pair) for pair in self.intervals],
        }


def _validate(samples: np.ndarray, level: float) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    x = x[~np.isnan(x)]
    if x.size == 0:
        msg = "no samples"
        raise ContractError(msg)
    if not 0.0 < level < 1.0:
        msg = f"level must lie in (0, 1), got {level}"
        raise ContractError(msg)
    return x


def hpd_shortest(samples: np.ndarray, level: float = 0.95) -> HpdResult:
    """Shortest window [x_(k), x_(k+m)] of the sorted draws, m = ceil(level N).

    Ties go to the leftmost window.
    """
    x = np.sort(_validate(samples, level))
    n = x.size
    m = math.ceil(level * n - 1e-9)
    if m >= n:
        logger.warning(
            "only %d draws for a %.3g HPD interval; returning the whole range", n, level
        )
        return HpdResult(level, ((float(x[0]), float(x[-1])),), "shortest_interval", 1.0)
    widths = x[m:] - x[: n - m]
    k = int(np.argmin(widths))
    return HpdResult(
        level, ((float(x[k]), float(x[k + m])),), "shortest_interval", (m + 1) / n
    )


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive index ranges of consecutive True entries."""
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2], strict=True)]


def _fraction_inside(sorted_x: np.ndarray, intervals: list[tuple[float, float]]) -> float:
    inside = 0
    for lo, hi in intervals:
        inside += int(np.searchsorted(sorted_x, hi, side="right") - np.searchsorted(sorted_x, lo))
    return inside / sorted_x.size


def hpd_kde_region(
    samples: np.ndarray, level: float = 0.95, bandwidth: float | None = None
) -> HpdResult:
    """Superlevel set of a Gaussian KDE holding ``level`` of the mass.

    The region may be a union of disjoint intervals. ``bandwidth`` is the kernel
    standard deviation; ``None`` or a nonpositive value selects Silverman's rule.
    The density threshold is bisected until both the KDE mass and the fraction
    of draws inside the region reach ``level``.
    """
    x = np.sort(_validate(samples, level))
    spread = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    if spread == 0.0:
        return HpdResult(level, ((float(x[0]), float(x[-1])),), "kde_threshold", 1.0)
    bw = "silverman" if bandwidth is None or bandwidth <= 0 else bandwidth / spread
    kde = stats.gaussian_kde(x, bw_method=bw)
    h = float(np.sqrt(kde.covariance[0, 0]))
    grid = np.linspace(x[0] - 3.0 * h, x[-1] + 3.0 * h, KDE_GRID_SIZE)
    density = kde(grid)
    total = float(density.sum())

    def region(threshold: float) -> list[tuple[float, float]]:
        return [(float(grid[a]), float(grid[b])) for a, b in _runs(density >= threshold)]

    def enough(threshold: float) -> bool:
        mask = density >= threshold
        if not mask.any():
            return False
        mass = float(density[mask].sum()) / total
        return mass >= level and _fraction_inside(x, region(threshold)) >= level

    lo, hi = 0.0, float(density.max())
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if enough(mid):
            lo = mid
        else:
            hi = mid
    intervals = region(lo)
    if not intervals:
        intervals = [(float(grid[0]), float(grid[-1]))]
    return HpdResult(level, tuple(intervals), "kde_threshold", _fraction_inside(x, intervals))
