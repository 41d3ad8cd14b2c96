"""Small statistics helpers: moments with standard errors, KS distances.

Only distances are computed here (thresholds live with the experiments);
p-values, where a test wants them, come from scipy.stats directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float  # nan when undefined (fewer than 2 samples)
    se_mean: float
    se_var: float

    @staticmethod
    def from_samples(x: np.ndarray) -> "MomentSummary":
        x = np.asarray(x, dtype=np.float64)
        r = len(x)
        mean = float(x.mean()) if r else math.nan
        if r < 2:
            return MomentSummary(mean, math.nan, math.nan, math.nan)
        var = float(x.var(ddof=1))
        sd = math.sqrt(var)
        return MomentSummary(
            mean=mean,
            variance=var,
            se_mean=sd / math.sqrt(r),
            se_var=var * math.sqrt(2.0 / (r - 1)),
        )


def ks_distance(sorted_sample: np.ndarray, cdf_values: np.ndarray) -> float:
    """Sup distance between the empirical cdf of a sorted sample and cdf values at it."""
    n = len(sorted_sample)
    if n == 0:
        raise ValueError("empty sample")
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    return float(np.max(np.maximum(grid_hi - cdf_values, cdf_values - grid_lo)))


def ks_distance_normal(sample: np.ndarray, mean: float, sd: float) -> float:
    """One-sample KS distance against N(mean, sd**2)."""
    if not sd > 0.0:
        return math.nan
    x = np.sort(np.asarray(sample, dtype=np.float64))
    return ks_distance(x, ndtr((x - mean) / sd))


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample KS distance (sup norm between the two empirical cdfs)."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if not len(a) or not len(b):
        raise ValueError("empty sample")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / len(a)
    cdf_b = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def format_g17(x: float) -> str:
    """Decimal form with 17 significant digits (round-trips float64 exactly)."""
    return f"{x:.17g}"
