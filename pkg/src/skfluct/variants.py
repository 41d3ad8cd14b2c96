"""Bipartite and diluted instantiations of the cluster machinery.

Bipartite: couplings live on K_{n1,n2} with the usual 1/sqrt(n) scaling
(n = n1 + n2).  Every simple loop has even length and alternates parts, so
loop sums are plain even-length cycle sums of the block weight matrix; path
parity is forced by the edge count (odd edge count = endpoints in different
parts), which fixes the closed-form counts

    loops of length 2l:      (n1)_l (n2)_l / (2l)
    paths with 2l edges:     [(n1)_{l+1} (n2)_l + (n1)_l (n2)_{l+1}] / 2
    paths with 2l - 1 edges: (n1)_l (n2)_l.

Diluted: the interaction graph is Bernoulli(p / n) and the edge weights are
tanh(beta * J_e) with no 1/sqrt(n).  In the high-temperature region
p_hat = p * E tanh^2(beta J) < 1 the loop statistic converges to a sum of
independent compound Poisson variables (rate p**k / (2k) for length k,
compounder log(1 + prod of k tanh weights)) and the path statistic to an
independent Gaussian with variance v2 = rho**4 p_hat / (2 (1 - p_hat)),
shifted by -v2/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import motifs
from .clusters import ClusterStats, _check_budget
from .model import (
    CompleteBipartiteGraph,
    DisorderDistribution,
    DisorderSample,
    EdgeWeightField,
    SparseGraph,
)

# ---------------------------------------------------------------------------
# Bipartite model


@dataclass(frozen=True)
class BipartiteParams:
    """Two-part sizes and proportions plus the shared (beta, rho, alpha) schedule."""

    n1: int
    n2: int
    beta: float
    rho: float = 0.0
    alpha: float = math.inf
    p1: float | None = None
    p2: float | None = None

    def __post_init__(self) -> None:
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("part sizes must be positive")
        if self.p1 is None:
            object.__setattr__(self, "p1", self.n1 / (self.n1 + self.n2))
        if self.p2 is None:
            object.__setattr__(self, "p2", self.n2 / (self.n1 + self.n2))
        if abs(self.p1 + self.p2 - 1.0) > 1e-12:
            raise ValueError("part proportions must sum to 1")

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def h(self) -> float:
        if self.rho == 0.0 or math.isinf(self.alpha):
            return 0.0
        return self.rho * float(self.n) ** (-self.alpha)

    @property
    def h_hat(self) -> float:
        return math.tanh(self.h)

    @property
    def beta_critical(self) -> float:
        """Zero-field phase transition point (p1 p2)**(-1/4)."""
        return (self.p1 * self.p2) ** (-0.25)


@lru_cache(maxsize=None)
def bipartite_counts(n1: int, n2: int, m: int) -> tuple[dict[int, int], dict[int, int]]:
    """Enumerated loop/path counts of K_{n1,n2} per length (exact integers)."""
    n = n1 + n2
    adj = np.zeros((n, n), dtype=np.int64)
    adj[:n1, n1:] = 1
    adj[n1:, :n1] = 1
    loop_counts = {l: motifs.simple_cycle_count_matrix(adj, l) for l in range(3, m + 1)}
    path_counts = {l: motifs.simple_path_count_matrix(adj, l) for l in range(1, m + 1)}
    return loop_counts, path_counts


def bipartite_count_closed_forms(n1: int, n2: int, m: int) -> tuple[dict[int, int], dict[int, int]]:
    """Closed-form bipartite loop/path counts, for cross-checking the enumerator."""
    ff = motifs.falling_factorial
    loops: dict[int, int] = {}
    paths: dict[int, int] = {}
    for length in range(3, m + 1):
        if length % 2:
            loops[length] = 0
        else:
            l = length // 2
            loops[length] = ff(n1, l) * ff(n2, l) // (2 * l)
    for length in range(1, m + 1):
        if length % 2:
            l = (length + 1) // 2
            paths[length] = ff(n1, l) * ff(n2, l)
        else:
            l = length // 2
            paths[length] = (ff(n1, l + 1) * ff(n2, l) + ff(n1, l) * ff(n2, l + 1)) // 2
    return loops, paths


def bipartite_cluster_stats(field: EdgeWeightField, h_hat: float, m: int) -> ClusterStats:
    """Loop/path/Q statistics over K_{n1,n2}; odd loop entries are identically zero."""
    if not isinstance(field.graph, CompleteBipartiteGraph):
        raise ValueError("expected weights over a complete bipartite graph")
    w = field.matrix()
    g = field.graph
    _check_budget(g.num_vertices, m, 1)
    loops = {l: float(motifs.simple_cycle_sum(w, l)) for l in range(3, m + 1)}
    paths = {l: h_hat**2 * float(motifs.simple_path_sum(w, l)) for l in range(1, m + 1)}
    centered = w * w
    mask = w != 0.0
    centered[mask] -= field.zeta2
    q_stat = 0.5 * float(centered.sum())
    loop_counts, path_counts = bipartite_counts(g.n1, g.n2, m)
    return ClusterStats(m=m, q_stat=q_stat, loops=loops, paths=paths,
                        loop_counts=loop_counts, path_counts=path_counts)


def bipartite_predicted_variance(beta: float, rho: float, p1: float, p2: float) -> tuple[float, float, float]:
    """Limiting variance contributions (loops, even paths, odd paths).

    Requires beta**4 p1 p2 < 1 (high temperature).  The loop total equals the
    bipartite v1^2 and even + odd path totals equal rho**4 v2^2 with
    v2^2 = (beta^4 + 2 beta^2) p1 p2 / (2 (1 - beta^4 p1 p2)).
    """
    x = beta**4 * p1 * p2
    if not 0.0 <= x < 1.0:
        raise ValueError("requires beta**4 p1 p2 < 1")
    loops = -0.5 * math.log1p(-x) - 0.5 * x
    even_paths = 0.5 * rho**4 * x / (1.0 - x)
    odd_paths = rho**4 * beta**2 * p1 * p2 / (1.0 - x)
    return loops, even_paths, odd_paths


def bipartite_v1_v2(beta: float, p1: float, p2: float) -> tuple[float, float]:
    """(v1^2, v2^2) of the two-species limit law specialized to the bipartite case."""
    x = beta**4 * p1 * p2
    if not 0.0 <= x < 1.0:
        raise ValueError("requires beta**4 p1 p2 < 1")
    v1 = -0.5 * (math.log1p(-x) + x)
    v2 = 0.5 * (beta**4 + 2.0 * beta**2) * p1 * p2 / (1.0 - x)
    return v1, v2


def bipartite_loop_variance_target(n1: int, n2: int, zeta2: float, length: int) -> float:
    """Exact finite-size Var of the length-`length` loop sum (length even)."""
    if length % 2:
        return 0.0
    l = length // 2
    count = motifs.falling_factorial(n1, l) * motifs.falling_factorial(n2, l) / (2 * l)
    return count * zeta2**length


# ---------------------------------------------------------------------------
# Diluted model


@dataclass(frozen=True)
class DilutedParams:
    """Bernoulli(p/n) interaction graph with tanh(beta J) edge weights."""

    n: int
    p: float
    beta: float
    rho: float = 0.0
    alpha: float = math.inf

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("need at least 3 vertices")
        if not 0.0 <= self.p < self.n:
            raise ValueError("mean degree p must lie in [0, n)")

    @property
    def h(self) -> float:
        if self.rho == 0.0 or math.isinf(self.alpha):
            return 0.0
        return self.rho * float(self.n) ** (-self.alpha)

    @property
    def h_hat(self) -> float:
        return math.tanh(self.h)

    def p_hat(self, dist: DisorderDistribution) -> float:
        """High-temperature parameter p * E tanh^2(beta J)."""
        return self.p * dist.weight_moment(self.beta, 2)


def sample_diluted(params: DilutedParams, dist: DisorderDistribution, rng: np.random.Generator) -> DisorderSample:
    """Bernoulli(p/n) edge set with i.i.d. couplings on the present edges."""
    n = params.n
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < params.p / n
    edges = np.column_stack([iu[keep], ju[keep]])
    graph = SparseGraph(n, edges)
    return DisorderSample(graph, dist.sample(rng, graph.num_edges))


class DilutedBudgetExceeded(RuntimeError):
    """Sparse sample produced too many partial paths to enumerate."""


def diluted_cycle_statistic(
    sample: DisorderSample,
    beta: float,
    h_hat: float,
    k_max: int,
    max_frontier: int = 5_000_000,
) -> tuple[float, float, dict[int, int]]:
    """(cycle statistic, path statistic, cycle counts by length) of a sparse sample.

    cycle statistic = sum over simple cycles of length 3..k_max of
    log(1 + prod tanh(beta J_e)); path statistic = sum over simple paths with
    1..k_max edges of log(1 + h_hat**2 prod tanh(beta J_e)).  Enumeration
    grows every simple path one hop at a time with the partial weights kept
    alongside, all vectorized; cycles are counted once via the canonical
    root-is-minimum, second-vertex-below-last orientation, undirected paths
    once via start < end.
    """
    if not isinstance(sample.graph, SparseGraph):
        raise ValueError("diluted statistics need a sparse sample")
    n = sample.graph.num_vertices
    iu, ju = sample.graph.edge_endpoints()
    weights = np.tanh(beta * sample.values)
    wmat = np.zeros((n, n))
    wmat[iu, ju] = weights
    wmat[ju, iu] = weights
    # flat adjacency in CSR layout so frontier expansion is one gather
    heads = np.concatenate([iu, ju])
    tails = np.concatenate([ju, iu])
    order = np.argsort(heads, kind="stable")
    flat_adj = tails[order]
    degree = np.bincount(heads, minlength=n)
    indptr = np.concatenate([[0], np.cumsum(degree)])

    cycle_stat = 0.0
    path_stat = 0.0
    cycle_counts = {k: 0 for k in range(3, k_max + 1)}
    if sample.graph.num_edges == 0:
        return cycle_stat, path_stat, cycle_counts

    # frontier of directed simple paths: vertex rows and running weight products
    verts = np.column_stack([heads, tails])
    wprod = np.concatenate([weights, weights])
    # paths with one edge, counted once
    path_stat += float(np.sum(np.log1p(h_hat**2 * weights)))
    for edge_count in range(2, k_max + 1):
        if not len(verts):
            break
        last = verts[:, -1]
        reps = degree[last]
        total = int(reps.sum())
        if total > max_frontier:
            raise DilutedBudgetExceeded(
                f"frontier of {total} partial paths exceeds the budget; "
                "the sampled graph is unusually dense"
            )
        starts = np.repeat(indptr[last], reps)
        offsets = np.arange(total) - np.repeat(np.cumsum(reps) - reps, reps)
        nxt = flat_adj[starts + offsets]
        base = np.repeat(verts, reps, axis=0)
        fresh = np.ones(len(base), dtype=bool)
        for col in range(base.shape[1]):
            fresh &= base[:, col] != nxt
        verts = np.column_stack([base[fresh], nxt[fresh]])
        wprod = np.repeat(wprod, reps)[fresh] * wmat[base[fresh, -1], nxt[fresh]]
        if not len(verts):
            break
        # record undirected paths once
        once = verts[:, 0] < verts[:, -1]
        if once.any():
            path_stat += float(np.sum(np.log1p(h_hat**2 * wprod[once])))
        # close cycles of length edge_count + 1
        if edge_count + 1 <= k_max:
            closing = wmat[verts[:, -1], verts[:, 0]]
            canon = (closing != 0.0) & (verts.min(axis=1) == verts[:, 0]) & (verts[:, 1] < verts[:, -1])
            if canon.any():
                cycle_counts[edge_count + 1] += int(canon.sum())
                cycle_stat += float(np.sum(np.log1p(wprod[canon] * closing[canon])))
    return cycle_stat, path_stat, cycle_counts


def expected_cycle_count(p: float, k: int) -> float:
    """Limiting mean number of length-k cycles in the Bernoulli(p/n) graph: p**k / (2k)."""
    return p**k / (2 * k)


def compound_atom_moments(
    dist: DisorderDistribution, beta: float, k: int, tol: float = 1e-15, max_terms: int = 500
) -> tuple[float, float]:
    """First two moments of log(1 + prod of k i.i.d. tanh(beta J) factors).

    The product is symmetric, so only even powers survive in the expansions

        E log(1+X)   = -sum_{i>=1} (E tanh^{2i})^k / (2i),
        E log(1+X)^2 =  sum_{s even} (2 H_{s-1} / s) (E tanh^s)^k,

    with E tanh^s = E tanh(beta J)^s.  Both series are truncated once the
    running term falls below tol.
    """
    mean = 0.0
    second = 0.0
    harmonic = 0.0
    for i in range(1, max_terms + 1):
        s = 2 * i
        ms = dist.weight_moment(beta, s)
        harmonic += 1.0 / (s - 1) + (1.0 / (s - 2) if s > 2 else 0.0)
        term_mean = ms**k / s
        term_second = (2.0 * harmonic / s) * ms**k
        mean -= term_mean
        second += term_second
        if term_second < tol and term_mean < tol:
            break
    else:
        raise RuntimeError("atom moment series did not converge")
    return mean, second


@dataclass(frozen=True, eq=False)
class CompoundPoissonLaw:
    """Reference law: sum over k of compound Poisson loop terms plus a Gaussian.

    lambdas[k] = p**k / (2k) for k = 3..k_max; each loop atom contributes
    log(1 + prod of k tanh(beta J) draws); the Gaussian part has mean
    -gaussian_var / 2 and variance gaussian_var = rho**4 p_hat / (2 (1 - p_hat)).
    """

    k_max: int
    lambdas: np.ndarray
    beta: float
    dist: DisorderDistribution
    gaussian_var: float


def compound_poisson_law(
    params: DilutedParams, dist: DisorderDistribution, k_max: int = 12
) -> CompoundPoissonLaw:
    if k_max < 3:
        raise ValueError("k_max must be at least 3")
    p_hat = params.p_hat(dist)
    if not p_hat < 1.0:
        raise ValueError(f"compound Poisson limit needs p_hat < 1, got {p_hat:.4f}")
    lambdas = np.array([expected_cycle_count(params.p, k) for k in range(3, k_max + 1)])
    v2 = params.rho**4 * p_hat / (2.0 * (1.0 - p_hat))
    return CompoundPoissonLaw(k_max=k_max, lambdas=lambdas, beta=params.beta, dist=dist, gaussian_var=v2)


def compound_poisson_reference(
    law: CompoundPoissonLaw, rng: np.random.Generator, n_samples: int
) -> np.ndarray:
    """Draws of sum_k (compound Poisson loop terms) + N(-v/2, v) with v = gaussian_var."""
    out = np.zeros(n_samples)
    for k_idx, k in enumerate(range(3, law.k_max + 1)):
        counts = rng.poisson(law.lambdas[k_idx], size=n_samples)
        total = int(counts.sum())
        if total:
            draws = law.dist.sample(rng, total * k).reshape(total, k)
            atoms = np.log1p(np.prod(np.tanh(law.beta * draws), axis=1))
            bounds = np.concatenate([[0], np.cumsum(counts)])
            sums = np.add.reduceat(np.concatenate([atoms, [0.0]]), bounds[:-1])
            sums[counts == 0] = 0.0
            out += sums
    if law.gaussian_var > 0.0:
        sd = math.sqrt(law.gaussian_var)
        out += rng.normal(-0.5 * law.gaussian_var, sd, size=n_samples)
    return out
