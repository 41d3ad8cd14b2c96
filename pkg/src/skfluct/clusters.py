"""Loop/path cluster statistics, truncated products, and their limit constants.

The three families that carry the fluctuations of log Z are

    Q     = sum over edges of (omega_e**2 - zeta2),
    L^l   = sum over simple loops of length l of prod omega_e       (l >= 3),
    P^l   = h_hat**2 * sum over simple paths with l edges of prod   (l >= 1),

all evaluated through the motif engine so that the cost is polynomial in n
and batches over disorder replicas.  The truncated product

    log Ztilde_m = sum_{loops, |l| <= m} log(1 + omega(loop))
                 + sum_{paths, |l| <= m} log(1 + h_hat**2 omega(path))

is evaluated by expanding each log into its power series; the k-th power
term is again a simple-loop/path sum, of the k-th Hadamard power of the
weight matrix, so the whole quantity stays exact (the series remainder is
driven below 1e-15 with a certified geometric tail bound).

Path clusters start at one edge.  Single edges appear in the subset
expansion with two odd-degree endpoints and weight h_hat**2 * omega_e, and
only with them does the summed path variance reproduce
v2^2 = beta^2 / (2 (1 - beta^2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import motifs
from .model import EdgeWeightField

MIN_CLUSTER_CUTOFF = 3
MAX_CLUSTER_CUTOFF = 8
#: Rough flop guard for one batched evaluation (Bell-number terms x n**3 each).
WORK_BUDGET = 5.0e12

_BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147]


class WorkBudgetExceeded(ValueError):
    pass


def _check_budget(n: int, m: int, batch: int) -> None:
    if not MIN_CLUSTER_CUTOFF <= m <= MAX_CLUSTER_CUTOFF:
        raise ValueError(f"cluster cutoff m must lie in [{MIN_CLUSTER_CUTOFF}, {MAX_CLUSTER_CUTOFF}]")
    work = _BELL[m + 1] * float(n) ** 3 * max(batch, 1)
    if work > WORK_BUDGET:
        raise WorkBudgetExceeded(
            f"estimated work {work:.2e} exceeds the {WORK_BUDGET:.0e} budget (n={n}, m={m}, batch={batch})"
        )


@dataclass(frozen=True, eq=False)
class ClusterStats:
    """Cluster statistic vector W = (L^3..L^m, P^1..P^m, Q) plus exact counts."""

    m: int
    q_stat: float
    loops: dict[int, float]
    paths: dict[int, float]
    loop_counts: dict[int, int]
    path_counts: dict[int, int]

    def vector(self) -> np.ndarray:
        vals = [self.loops[l] for l in sorted(self.loops)]
        vals += [self.paths[l] for l in sorted(self.paths)]
        vals.append(self.q_stat)
        return np.array(vals)


@lru_cache(maxsize=None)
def complete_graph_counts(n: int, m: int) -> tuple[dict[int, int], dict[int, int]]:
    """Enumerated loop/path counts of K_n per length, exact integers."""
    loop_counts = {l: motifs.simple_cycle_count(n, l) for l in range(3, m + 1)}
    path_counts = {l: motifs.simple_path_count(n, l) for l in range(1, m + 1)}
    return loop_counts, path_counts


def cluster_stats_batch(w: np.ndarray, zeta2: float, h_hat: float, m: int) -> dict[str, np.ndarray]:
    """Batched cluster statistics from weight matrices of shape (..., n, n)."""
    n = w.shape[-1]
    batch = int(np.prod(w.shape[:-2], dtype=np.int64)) if w.ndim > 2 else 1
    _check_budget(n, m, batch)
    out: dict[str, np.ndarray] = {}
    for l in range(3, m + 1):
        out[f"L{l}"] = motifs.simple_cycle_sum(w, l)
    for l in range(1, m + 1):
        out[f"P{l}"] = h_hat**2 * motifs.simple_path_sum(w, l)
    # subtract zeta2 per edge before summing, so degenerate laws give Q = 0 exactly
    centered = w * w - zeta2
    idx = np.arange(n)
    centered[..., idx, idx] = 0.0
    out["Q"] = 0.5 * np.sum(centered, axis=(-1, -2))
    return out


def cluster_stats(field: EdgeWeightField, h_hat: float, m: int) -> ClusterStats:
    """Exact loop/path/independent-sum statistics for one disorder sample."""
    w = field.matrix()
    stats = cluster_stats_batch(w, field.zeta2, h_hat, m)
    n = field.graph.num_vertices
    loop_counts, path_counts = complete_graph_counts(n, m)
    return ClusterStats(
        m=m,
        q_stat=float(stats["Q"]),
        loops={l: float(stats[f"L{l}"]) for l in range(3, m + 1)},
        paths={l: float(stats[f"P{l}"]) for l in range(1, m + 1)},
        loop_counts=loop_counts,
        path_counts=path_counts,
    )


# ---------------------------------------------------------------------------
# Truncated cluster product


def _log_cluster_series(w: np.ndarray, prefactor: float, lengths, kind: str,
                        tol: float = 1e-15, max_terms: int = 200) -> np.ndarray:
    """sum over clusters of log(1 + prefactor * omega(cluster)), batched.

    Expands log(1+x) termwise; the k-th term needs the cluster sum of the
    k-th Hadamard power of w.  Terms for length l are bounded by
    S2(l) * x_max**(k-2) / k with x_max = prefactor * max|w|**l and
    S2(l) = prefactor**2 * (cluster sum of |w| Hadamard-squared), which gives
    a certified geometric tail once x_max < 1 (always true for tanh weights).
    """
    sum_fn = motifs.simple_cycle_sum if kind == "loops" else motifs.simple_path_sum
    lengths = list(lengths)
    if not lengths or prefactor == 0.0:
        return np.zeros(w.shape[:-2])
    w_abs_max = float(np.max(np.abs(w)))
    if not w_abs_max < 1.0:
        raise ValueError("cluster factor log(1 + x) undefined: an edge weight has |w| >= 1")
    total = np.zeros(w.shape[:-2])
    for l in lengths:
        x_max = prefactor * w_abs_max**l
        s2 = prefactor**2 * float(np.max(np.abs(sum_fn(np.abs(w) ** 2, l))))
        acc = prefactor * sum_fn(w, l)
        hk = w * w
        k = 2
        while True:
            acc += ((-1) ** (k + 1)) * (prefactor**k / k) * sum_fn(hk, l)
            # remaining tail is below s2 * x_max**(k-1) / ((k+1)(1-x_max))
            tail = s2 * x_max ** (k - 1) / ((k + 1) * (1.0 - x_max)) if x_max > 0 else 0.0
            if tail < tol:
                break
            k += 1
            if k > max_terms:
                raise RuntimeError("cluster log series did not converge (weights too close to 1)")
            hk = hk * w
        total = total + acc
    return total


def ztilde_log_batch(w: np.ndarray, h_hat: float, m: int) -> np.ndarray:
    """log Ztilde_m for weight matrices of shape (..., n, n)."""
    n = w.shape[-1]
    batch = int(np.prod(w.shape[:-2], dtype=np.int64)) if w.ndim > 2 else 1
    _check_budget(n, m, batch)
    loops = _log_cluster_series(w, 1.0, range(3, m + 1), "loops")
    paths = _log_cluster_series(w, h_hat**2, range(1, m + 1), "paths")
    return loops + paths


def ztilde(field: EdgeWeightField, h_hat: float, m: int) -> float:
    """log of the truncated loop/path product for one disorder sample."""
    return float(ztilde_log_batch(field.matrix(), h_hat, m))


# ---------------------------------------------------------------------------
# Deterministic constants


@dataclass(frozen=True)
class TruncationReport:
    """Cutoff diagnostics: the L2 truncation bound, the realized log Ztilde,
    and the limiting log-correction constant for the same cutoff."""

    m: int
    l2_bound: float
    ztilde_log: float
    limit_constant: float


def truncation_report(field: EdgeWeightField, h_hat: float, m: int,
                      beta: float, rho: float) -> TruncationReport:
    loop_const, path_const, _ = limit_constants(beta, rho, m)
    return TruncationReport(
        m=m,
        l2_bound=truncation_bound(field.betaN2, field.rhoN4, m),
        ztilde_log=ztilde(field, h_hat, m),
        limit_constant=loop_const + path_const,
    )


def truncation_bound(betaN2: float, rhoN4: float, m: int) -> float:
    """L2 bound on Zhat minus its |cluster| <= m truncation:
    2 m**(1/8) betaN**m exp(sqrt((1 + rhoN4) m / 2))."""
    if not 0.0 < betaN2 < 1.0:
        raise ValueError("bound requires betaN2 in (0, 1)")
    if rhoN4 < 0.0:
        raise ValueError("rhoN4 must be nonnegative")
    m_min = 2.0 * (1.0 + rhoN4) / (1.0 - betaN2) ** 2
    if m < m_min:
        raise ValueError(f"bound hypothesis needs m >= {m_min:.6g}, got m = {m}")
    beta_n = math.sqrt(betaN2)
    return 2.0 * m ** (1.0 / 8.0) * beta_n**m * math.exp(math.sqrt((1.0 + rhoN4) * m / 2.0))


def limit_constants(beta: float, rho: float, m: int, var_j2: float = 2.0):
    """Limiting means and variance diagonal of the cluster vector.

    Returns (loop_const, path_const, sigma_diag) where loop_const and
    path_const are the limits of the second-order log corrections
    -1/2 sum_{l=3..m} beta**(2l) / (2l) and -1/4 sum_{l=1..m} rho**4 beta**(2l),
    and sigma_diag is ordered (L^3..L^m, P^1..P^m, Q) with Q entry
    var_j2 * beta**4 / 2.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError("limit constants require beta < 1")
    loop_terms = [beta ** (2 * l) / (2 * l) for l in range(3, m + 1)]
    path_terms = [rho**4 * beta ** (2 * l) / 2.0 for l in range(1, m + 1)]
    loop_const = -0.5 * sum(loop_terms)
    path_const = -0.5 * sum(path_terms)
    sigma_diag = np.array(loop_terms + path_terms + [0.5 * beta**4 * var_j2])
    return loop_const, path_const, sigma_diag


def zbar_shift(beta: float, m4: float) -> float:
    """Limit of log Zbar - (1/2) sum_e omega_e**2, namely beta**4 * E J**4 / 8."""
    return beta**4 * m4 / 8.0


# ---------------------------------------------------------------------------
# Exact finite-n variance targets (orthogonality of distinct clusters)


def loop_variance_target(n: int, zeta2: float, length: int) -> float:
    return motifs.falling_factorial(n, length) / (2 * length) * zeta2**length


def path_variance_target(n: int, zeta2: float, h_hat: float, num_edges: int) -> float:
    return h_hat**4 * motifs.falling_factorial(n, num_edges + 1) / 2 * zeta2**num_edges


def q_variance_target(n: int, var_omega2: float) -> float:
    return n * (n - 1) / 2 * var_omega2
