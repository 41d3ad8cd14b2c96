"""Core model types: parameters, disorder laws, coupling samples, edge weights.

The single source of truth for (N, beta, rho, alpha) is ModelParams; the
external field is always derived as h = rho * n**(-alpha), with alpha = +inf
allowed as a first-class encoding of h = 0.  Couplings live in a flat array
aligned with a canonical edge order (upper-triangular lexicographic for
complete graphs, row-major for complete bipartite, sorted edge list for
sparse graphs), which keeps replica-batched work cache friendly.

Everything here is immutable after construction; sampling takes an explicit
numpy Generator owned by the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import standard_normal_rule, uniform_symmetric_rule

MODEL_SK = "sk"
MODEL_BIPARTITE = "bipartite"
MODEL_DILUTED = "diluted"

LAW_GAUSSIAN = "gaussian"
LAW_RADEMACHER = "rademacher"
LAW_UNIFORM = "uniform"
LAW_TABLE = "table"


# ---------------------------------------------------------------------------
# Graph descriptors


@lru_cache(maxsize=None)
def _triu_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    iu, ju = np.triu_indices(n, k=1)
    iu.setflags(write=False)
    ju.setflags(write=False)
    return iu, ju


@dataclass(frozen=True)
class CompleteGraph:
    """Complete graph K_n with edges ordered (0,1), (0,2), ..., (n-2,n-1)."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one vertex")

    @property
    def num_vertices(self) -> int:
        return self.n

    @property
    def num_edges(self) -> int:
        return self.n * (self.n - 1) // 2

    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return _triu_pairs(self.n)


@dataclass(frozen=True)
class CompleteBipartiteGraph:
    """Complete bipartite graph K_{n1,n2}; part 1 vertices come first."""

    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("both parts need at least one vertex")

    @property
    def num_vertices(self) -> int:
        return self.n1 + self.n2

    @property
    def num_edges(self) -> int:
        return self.n1 * self.n2

    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        i = np.repeat(np.arange(self.n1), self.n2)
        j = self.n1 + np.tile(np.arange(self.n2), self.n1)
        return i, j


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Explicit sorted edge list on n vertices (used by the diluted model)."""

    n: int
    edges: np.ndarray  # shape (E, 2), rows (i, j) with i < j, lexicographically sorted

    def __post_init__(self) -> None:
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e[:, 0] >= e[:, 1]).any():
            raise ValueError("edges must satisfy i < j")
        if e.size and (e.min() < 0 or e.max() >= self.n):
            raise ValueError("edge endpoints out of range")
        object.__setattr__(self, "edges", e)

    @property
    def num_vertices(self) -> int:
        return self.n

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.edges[:, 0], self.edges[:, 1]


Graph = CompleteGraph | CompleteBipartiteGraph | SparseGraph


# ---------------------------------------------------------------------------
# Model parameters


@dataclass(frozen=True)
class ModelParams:
    """System size, inverse temperature and field schedule h = rho * n**(-alpha)."""

    n: int
    beta: float
    rho: float = 0.0
    alpha: float = math.inf
    kind: str = MODEL_SK

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.beta < 0.0:
            raise ValueError("beta must be nonnegative")
        if self.rho < 0.0:
            raise ValueError("rho must be nonnegative")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative (use inf for zero field)")
        if self.kind not in (MODEL_SK, MODEL_BIPARTITE, MODEL_DILUTED):
            raise ValueError(f"unknown model kind {self.kind!r}")

    @property
    def h(self) -> float:
        return field_strength(self)

    @property
    def h_hat(self) -> float:
        return math.tanh(self.h)


def field_strength(params: ModelParams) -> float:
    """External field rho * n**(-alpha); exactly 0 for rho = 0 or alpha = inf."""
    if params.rho == 0.0 or math.isinf(params.alpha):
        return 0.0
    return params.rho * float(params.n) ** (-params.alpha)


# ---------------------------------------------------------------------------
# Disorder laws


@dataclass(frozen=True, eq=False)
class DisorderDistribution:
    """Symmetric unit-variance coupling law with finite sixth moment.

    `moments` stores (m2, m4, m6) of J.  For the table law, `values`/`probs`
    describe the positive support; a fair sign is applied on sampling.
    """

    law: str
    moments: tuple[float, float, float]
    values: np.ndarray | None = None
    probs: np.ndarray | None = None

    def __post_init__(self) -> None:
        m2, m4, m6 = self.moments
        if abs(m2 - 1.0) > 1e-12:
            raise ValueError("coupling law must have unit variance")
        if m4 < 1.0 - 1e-12:
            raise ValueError("fourth moment below Jensen bound m4 >= m2**2")
        if not math.isfinite(m6):
            raise ValueError("sixth moment must be finite")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def gaussian() -> "DisorderDistribution":
        return DisorderDistribution(LAW_GAUSSIAN, (1.0, 3.0, 15.0))

    @staticmethod
    def rademacher() -> "DisorderDistribution":
        return DisorderDistribution(LAW_RADEMACHER, (1.0, 1.0, 1.0))

    @staticmethod
    def uniform_symmetric() -> "DisorderDistribution":
        # uniform on [-sqrt(3), sqrt(3)]: m4 = 9/5, m6 = 27/7
        return DisorderDistribution(LAW_UNIFORM, (1.0, 9.0 / 5.0, 27.0 / 7.0))

    @staticmethod
    def table(values, probs) -> "DisorderDistribution":
        """Discrete symmetric law taking +-values[i] with probability probs[i]/2 each."""
        v = np.asarray(values, dtype=np.float64)
        p = np.asarray(probs, dtype=np.float64)
        if v.ndim != 1 or v.shape != p.shape or not len(v):
            raise ValueError("values and probs must be 1-d arrays of equal length")
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be a probability vector")
        m2 = float(np.dot(p, v**2))
        if abs(m2 - 1.0) > 1e-10:
            raise ValueError("table law must have unit variance")
        m4 = float(np.dot(p, v**4))
        m6 = float(np.dot(p, v**6))
        return DisorderDistribution(LAW_TABLE, (1.0, m4, m6), values=v, probs=p)

    @staticmethod
    def from_name(name: str) -> "DisorderDistribution":
        table = {
            LAW_GAUSSIAN: DisorderDistribution.gaussian,
            LAW_RADEMACHER: DisorderDistribution.rademacher,
            LAW_UNIFORM: DisorderDistribution.uniform_symmetric,
        }
        if name not in table:
            raise ValueError(f"unknown disorder law {name!r}")
        return table[name]()

    # -- moments ------------------------------------------------------------

    @property
    def m4(self) -> float:
        return self.moments[1]

    @property
    def var_j_squared(self) -> float:
        return self.moments[1] - 1.0

    def expect(self, f) -> float:
        """E f(J), exact for discrete laws, fixed-order quadrature otherwise."""
        if self.law == LAW_RADEMACHER:
            return 0.5 * (float(f(np.float64(1.0))) + float(f(np.float64(-1.0))))
        if self.law == LAW_TABLE:
            vals = 0.5 * (f(self.values) + f(-self.values))
            return float(np.dot(self.probs, vals))
        if self.law == LAW_GAUSSIAN:
            return standard_normal_rule().expect(f)
        if self.law == LAW_UNIFORM:
            return uniform_symmetric_rule().expect(f)
        raise AssertionError(self.law)

    def weight_moment(self, scale: float, power: int) -> float:
        """E tanh(scale * J)**power for even power."""
        if power % 2:
            return 0.0
        return self.expect(lambda x: np.tanh(scale * x) ** power)

    # -- sampling -----------------------------------------------------------

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.law == LAW_GAUSSIAN:
            return rng.standard_normal(size)
        if self.law == LAW_RADEMACHER:
            return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0
        if self.law == LAW_UNIFORM:
            half = math.sqrt(3.0)
            return rng.uniform(-half, half, size=size)
        if self.law == LAW_TABLE:
            magnitudes = rng.choice(self.values, size=size, p=self.probs)
            signs = rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0
            return magnitudes * signs
        raise AssertionError(self.law)


# ---------------------------------------------------------------------------
# Quenched coupling samples


@dataclass(frozen=True, eq=False)
class DisorderSample:
    """One quenched realization of the couplings on an interaction graph."""

    graph: Graph
    values: np.ndarray  # aligned with graph.edge_endpoints()

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.graph.num_edges,):
            raise ValueError("coupling array does not match the edge count")
        object.__setattr__(self, "values", v)

    def coupling(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        iu, ju = self.graph.edge_endpoints()
        idx = np.flatnonzero((iu == i) & (ju == j))
        if not len(idx):
            raise KeyError((i, j))
        return float(self.values[idx[0]])

    def as_matrix(self) -> np.ndarray:
        """Dense symmetric coupling matrix with zero diagonal."""
        n = self.graph.num_vertices
        m = np.zeros((n, n))
        iu, ju = self.graph.edge_endpoints()
        m[iu, ju] = self.values
        m[ju, iu] = self.values
        return m


def sample_disorder(dist: DisorderDistribution, graph: Graph, rng: np.random.Generator) -> DisorderSample:
    """Draw i.i.d. couplings for every edge of the graph."""
    return DisorderSample(graph, dist.sample(rng, graph.num_edges))


# ---------------------------------------------------------------------------
# Hamiltonian and edge weights


def hamiltonian(spins: np.ndarray, sample: DisorderSample, params: ModelParams) -> float:
    """Energy of a +-1 configuration (bipartite configurations concatenated).

    Complete and bipartite graphs carry the mean-field 1/sqrt(n) normalization;
    sparse (diluted) graphs use beta * J_e per present edge with no rescaling.
    """
    spins = np.asarray(spins, dtype=np.float64)
    n = sample.graph.num_vertices
    if spins.shape != (n,):
        raise ValueError(f"spin vector of length {spins.shape} does not match {n} vertices")
    if not np.all(np.abs(spins) == 1.0):
        raise ValueError("spins must be +-1 valued")
    iu, ju = sample.graph.edge_endpoints()
    pair_term = float(np.dot(sample.values, spins[iu] * spins[ju]))
    if isinstance(sample.graph, SparseGraph):
        coupling = params.beta * pair_term
    else:
        coupling = params.beta / math.sqrt(n) * pair_term
    return coupling + params.h * float(spins.sum())


@dataclass(frozen=True, eq=False)
class EdgeWeightField:
    """Hyperbolic-tangent edge weights and their exact low moments.

    omega_e = tanh(beta * J_e / sqrt(n)); zeta2 = E omega**2 under the coupling
    law; betaN2 = n * zeta2 and rhoN4 = n * h_hat**4 are the finite-size scale
    parameters that drive the truncation bound and the limit laws.
    """

    graph: Graph
    omega: np.ndarray
    zeta2: float
    betaN2: float
    rhoN4: float

    def matrix(self) -> np.ndarray:
        n = self.graph.num_vertices
        m = np.zeros((n, n))
        iu, ju = self.graph.edge_endpoints()
        m[iu, ju] = self.omega
        m[ju, iu] = self.omega
        return m


def edge_weights(sample: DisorderSample, params: ModelParams, dist: DisorderDistribution) -> EdgeWeightField:
    """tanh edge weights for complete or complete-bipartite couplings."""
    if isinstance(sample.graph, SparseGraph):
        raise ValueError("diluted couplings use tanh(beta * J) directly; see skfluct.variants")
    n = sample.graph.num_vertices
    scale = params.beta / math.sqrt(n)
    omega = np.tanh(scale * sample.values)
    zeta2 = dist.weight_moment(scale, 2)
    return EdgeWeightField(
        graph=sample.graph,
        omega=omega,
        zeta2=zeta2,
        betaN2=n * zeta2,
        rhoN4=n * params.h_hat**4,
    )
