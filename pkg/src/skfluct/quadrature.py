"""Fixed-order quadrature rules for expectations over symmetric disorder laws.

All downstream moment identities (edge-weight variances, overlap fixed point,
predicted limit laws) need deterministic expectations, not Monte Carlo ones,
so Gaussian integrals use a fixed 64-node Gauss-Hermite rule and bounded
symmetric laws use a 64-node Gauss-Legendre rule.  The integrands are entire
and decay fast; at these orders the rule error is far below 1e-14 for every
parameter range exercised here.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss

DEFAULT_ORDER = 64


@dataclass(frozen=True, eq=False)
class Rule:
    """Nodes and weights normalized so that expect(f) = sum(w * f(x))."""

    nodes: np.ndarray
    weights: np.ndarray

    def expect(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@lru_cache(maxsize=None)
def standard_normal_rule(order: int = DEFAULT_ORDER) -> Rule:
    """Rule for E f(g) with g ~ N(0, 1), via Gauss-Hermite nodes."""
    x, w = hermgauss(order)
    return Rule(nodes=np.sqrt(2.0) * x, weights=w / np.sqrt(np.pi))


@lru_cache(maxsize=None)
def uniform_symmetric_rule(order: int = DEFAULT_ORDER) -> Rule:
    """Rule for E f(u) with u uniform on [-sqrt(3), sqrt(3)] (unit variance)."""
    x, w = leggauss(order)
    half_width = np.sqrt(3.0)
    return Rule(nodes=half_width * x, weights=w / 2.0)


def normal_expect(f: Callable[[np.ndarray], np.ndarray], order: int = DEFAULT_ORDER) -> float:
    return standard_normal_rule(order).expect(f)
