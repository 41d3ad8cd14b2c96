"""Exchangeable-pair identities and empirical normality of the cluster vector.

The pair resamples one uniformly chosen edge weight.  Conditionally on the
disorder, the drift of each cluster coordinate is linear with an explicit
rate: for a loop sum of length l the resampled edge kills exactly the loops
through it, so

    E(Delta L^l | disorder) = -(1/N2) sum_{i<j} w_ij * (path completions of (i,j))
                            = -(l/N2) L^l,

with N2 = n(n-1)/2, and analogously for path sums (rate l/N2, the removed
edge can sit at any of the l positions) and for Q (rate 1/N2).  The left
side is evaluated from endpoint-resolved completion sums, the right side
from the global cluster statistics, so the residual checks the enumeration
bookkeeping end to end; it is an algebraic identity, zero up to rounding.

The limiting covariance is diagonal; empirical covariance and per-coordinate
Kolmogorov-Smirnov distances against the target Gaussians quantify how close
the finite-n cluster vector is to its limit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import motifs
from .clusters import _check_budget
from .stats import ks_distance_normal


def coordinate_names(m: int) -> list[str]:
    return [f"L{l}" for l in range(3, m + 1)] + [f"P{l}" for l in range(1, m + 1)] + ["Q"]


def lambda_values(n: int, m: int) -> dict[str, float]:
    """Linearity rates per coordinate: l/N2 for clusters with l edges, 1/N2 for Q."""
    n2 = n * (n - 1) / 2.0
    lam = {f"L{l}": l / n2 for l in range(3, m + 1)}
    lam.update({f"P{l}": l / n2 for l in range(1, m + 1)})
    lam["Q"] = 1.0 / n2
    return lam


@dataclass(frozen=True, eq=False)
class SteinCheck:
    """Results of the exchangeable-pair verification.

    linearity parts are filled by linearity_check, covariance parts by
    empirical_cov_check; unused parts stay None.
    """

    coord_names: list[str]
    lambda_values: dict[str, float] | None = None
    linearity_residual: float | None = None
    residual_per_coord: dict[str, float] | None = None
    sigma_target: np.ndarray | None = None
    empirical_cov: np.ndarray | None = None
    empirical_mean: np.ndarray | None = None
    max_abs_correlation: float | None = None
    ks_per_coord: np.ndarray | None = None


def linearity_check(w: np.ndarray, zeta2: float, h_hat: float, m: int) -> SteinCheck:
    """Verify E(Delta W | disorder) = -Lambda W coordinate by coordinate.

    `w` is one weight matrix or a batch (..., n, n); residuals are maxima of
    |lhs - rhs| over the batch.
    """
    from .clusters import cluster_stats_batch

    n = w.shape[-1]
    batch = int(np.prod(w.shape[:-2], dtype=np.int64)) if w.ndim > 2 else 1
    _check_budget(n, m, batch)
    n2 = n * (n - 1) / 2.0
    lam = lambda_values(n, m)
    stats = cluster_stats_batch(w, zeta2, h_hat, m)
    residuals: dict[str, float] = {}
    for l in range(3, m + 1):
        completion = motifs.simple_path_matrix(w, l - 1)
        lhs = -0.5 * np.sum(w * completion, axis=(-1, -2)) / n2
        rhs = -lam[f"L{l}"] * stats[f"L{l}"]
        residuals[f"L{l}"] = float(np.max(np.abs(lhs - rhs)))
    for l in range(1, m + 1):
        completion = motifs.path_completion_matrix(w, l - 1)
        lhs = -(h_hat**2) * 0.5 * np.sum(w * completion, axis=(-1, -2)) / n2
        rhs = -lam[f"P{l}"] * stats[f"P{l}"]
        residuals[f"P{l}"] = float(np.max(np.abs(lhs - rhs)))
    # Q: the resampled entry is replaced by an independent copy of the same
    # law, so E(Delta Q | disorder) = -(1/N2) sum_e (w_e^2 - zeta2) exactly
    centered = w * w - zeta2
    idx = np.arange(n)
    centered[..., idx, idx] = 0.0
    lhs = -0.5 * np.sum(centered, axis=(-1, -2)) / n2
    rhs = -lam["Q"] * stats["Q"]
    residuals["Q"] = float(np.max(np.abs(lhs - rhs)))
    return SteinCheck(
        coord_names=coordinate_names(m),
        lambda_values=lam,
        linearity_residual=max(residuals.values()),
        residual_per_coord=residuals,
    )


def empirical_cov_check(samples: np.ndarray, sigma_target: np.ndarray, m: int) -> SteinCheck:
    """Sample mean/covariance of the cluster vector and KS distances per coordinate.

    `samples` has shape (R, 2m - 1) ordered (L^3..L^m, P^1..P^m, Q); each
    coordinate is tested against N(0, sigma_target[k]).
    """
    samples = np.asarray(samples, dtype=np.float64)
    r, d = samples.shape
    if r < 500:
        raise ValueError("need at least 500 replicas for the covariance check")
    if d != 2 * m - 1 or len(sigma_target) != d:
        raise ValueError("coordinate count does not match the cutoff m")
    mean = samples.mean(axis=0)
    cov = np.cov(samples, rowvar=False, ddof=1)
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    off = corr[~np.eye(d, dtype=bool)]
    ks = np.array(
        [ks_distance_normal(samples[:, k], 0.0, float(np.sqrt(sigma_target[k]))) for k in range(d)]
    )
    return SteinCheck(
        coord_names=coordinate_names(m),
        sigma_target=np.asarray(sigma_target, dtype=np.float64),
        empirical_cov=cov,
        empirical_mean=mean,
        max_abs_correlation=float(np.max(np.abs(off))) if d > 1 else 0.0,
        ks_per_coord=ks,
    )
