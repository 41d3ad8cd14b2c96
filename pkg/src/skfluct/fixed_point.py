"""Overlap fixed point q = E tanh^2(beta sqrt(q) g + h) and predicted limit laws.

The fixed-point map is monotone and contractive for beta < 1 (uniqueness of
the solution is classical), so plain iteration from the arithmetic upper
bound h**2 / (1 - beta**2) converges without damping.  The same quadrature
rule evaluates the variance of log cosh(beta sqrt(q) g + h) and the
deterministic centering used in the strong-field-decay regime.

Regimes of the field decay exponent alpha (field h = rho * n**(-alpha)):
  alpha > 1/4   sub-critical:   O(1) fluctuations, rho drops out,
  alpha = 1/4   critical:       O(1) fluctuations, rho**4 enters,
  alpha < 1/4   super-critical: scale sqrt(n h**4), variance beta**2/(2(1-beta**2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DisorderDistribution, ModelParams
from .quadrature import standard_normal_rule

#: Default guard for the super-critical regime; the limit law is only
#: backed by the theory for beta**2 < 1/6, but callers may raise it to 1.
DEFAULT_BETA0 = 1.0 / math.sqrt(6.0)

SUB_CRITICAL = "sub_critical"
CRITICAL = "critical"
SUPER_CRITICAL = "super_critical"


def q_upper_bound(beta: float, h: float) -> float:
    return h * h / (1.0 - beta * beta)

def q_lower_bound(beta: float, h: float) -> float:
    one = 1.0 - beta * beta
    return max(0.0, h * h / one - 2.0 * h**4 / one**3)


@dataclass(frozen=True)
class FixedPointResult:
    q: float
    iterations: int
    residual: float
    lower_bound: float
    upper_bound: float


def _fixed_point_map(beta: float, h: float, q: float) -> float:
    rule = standard_normal_rule()
    arg = beta * math.sqrt(max(q, 0.0)) * rule.nodes + h
    return float(np.dot(rule.weights, np.tanh(arg) ** 2))


def solve_q(beta: float, h: float, tol: float = 1e-13, max_iter: int = 500) -> FixedPointResult:
    """Iterate q <- E tanh^2(beta sqrt(q) g + h) from the upper bound until |dq| < tol."""
    if not 0.0 <= beta < 1.0:
        raise ValueError("solve_q requires 0 <= beta < 1")
    if h < 0.0:
        raise ValueError("h must be nonnegative")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    lower = q_lower_bound(beta, h)
    upper = q_upper_bound(beta, h)
    q = upper
    for it in range(1, max_iter + 1):
        q_next = _fixed_point_map(beta, h, q)
        if abs(q_next - q) < tol:
            q = q_next
            residual = abs(q - _fixed_point_map(beta, h, q))
            return FixedPointResult(q=q, iterations=it, residual=residual,
                                    lower_bound=lower, upper_bound=upper)
        q = q_next
    raise RuntimeError(
        f"fixed point iteration did not converge in {max_iter} steps "
        f"(beta={beta}, h={h}); parameters are outside the contraction region"
    )


# ---------------------------------------------------------------------------
# Scalar variance building blocks


def v1_squared(beta: float) -> float:
    """Loop-cluster variance: -log(1-beta^2)/2 - beta^2/2 - beta^4/4."""
    if not 0.0 <= beta < 1.0:
        raise ValueError("v1_squared requires 0 <= beta < 1")
    b2 = beta * beta
    return -0.5 * math.log1p(-b2) - 0.5 * b2 - 0.25 * b2 * b2


def v2_squared(beta: float) -> float:
    """Path-cluster variance: beta^2 / (2 (1 - beta^2))."""
    if not 0.0 <= beta < 1.0:
        raise ValueError("v2_squared requires 0 <= beta < 1")
    b2 = beta * beta
    return 0.5 * b2 / (1.0 - b2)


def var_logcosh(beta: float, q: float, h: float) -> float:
    """Var(log cosh(beta sqrt(q) g + h)) over g ~ N(0,1), by quadrature.

    Bounded above by beta^2 q^2, and equal to beta^2 (2 - beta^2) q^2 / 2 up
    to O(q^3) when (q, h) sit on the fixed-point relation.
    """
    if q < 0.0:
        raise ValueError("q must be nonnegative")
    if q == 0.0:
        return 0.0
    rule = standard_normal_rule()
    f = np.log(np.cosh(beta * math.sqrt(q) * rule.nodes + h))
    mean = float(np.dot(rule.weights, f))
    return float(np.dot(rule.weights, (f - mean) ** 2))


def expected_log_2cosh(beta: float, q: float, h: float) -> float:
    """E log(2 cosh(beta sqrt(q) g + h)) over g ~ N(0,1)."""
    rule = standard_normal_rule()
    arg = beta * math.sqrt(max(q, 0.0)) * rule.nodes + h
    ax = np.abs(arg)
    return float(np.dot(rule.weights, ax + np.log1p(np.exp(-2.0 * ax))))


# ---------------------------------------------------------------------------
# Predicted limit laws


@dataclass(frozen=True)
class PredictedLaw:
    """Centering, scale and limiting N(mean, variance) for the log-partition function.

    The centered statistic is (log Z - centering) / scale.  In the sub- and
    critical regimes scale = 1; in the super-critical regime the scale is
    sqrt(n h**4) and the limit is centered Gaussian with variance v2_sq.
    """

    regime: str
    centering: float
    scale: float
    mean: float
    variance: float
    v1_sq: float
    v2_sq: float


def classify_regime(alpha: float) -> str:
    if alpha > 0.25:
        return SUB_CRITICAL
    if alpha == 0.25:
        return CRITICAL
    return SUPER_CRITICAL


def predicted_law(
    params: ModelParams,
    dist: DisorderDistribution,
    beta0: float = DEFAULT_BETA0,
) -> PredictedLaw:
    """Limit law of log Z after the regime-appropriate centering and scaling."""
    beta, n, h = params.beta, params.n, params.h
    regime = classify_regime(params.alpha)
    if params.rho == 0.0:
        regime = SUB_CRITICAL  # zero field is the deep sub-critical endpoint
    m4 = dist.m4
    b4 = beta**4
    if regime in (SUB_CRITICAL, CRITICAL):
        if beta >= 1.0:
            raise ValueError("sub-critical and critical laws require beta < 1")
        v1 = v1_squared(beta)
        v2 = v2_squared(beta)
        centering = n * math.log(2.0 * math.cosh(h)) + 0.25 * (n - 1) * beta * beta
        bulk = v1 if regime == SUB_CRITICAL else v1 + params.rho**4 * v2
        mean = -0.5 * bulk - (b4 / 24.0) * m4
        variance = bulk + (b4 / 8.0) * (m4 - 1.0)
        return PredictedLaw(regime, centering, 1.0, mean, variance, v1, v2)
    if beta >= beta0:
        raise ValueError(f"super-critical law requires beta < beta0 = {beta0}")
    q = solve_q(beta, h).q
    centering = n * expected_log_2cosh(beta, q, h) + 0.25 * n * beta * beta * (1.0 - q) ** 2
    scale = math.sqrt(n * h**4)
    v2 = v2_squared(beta)
    return PredictedLaw(SUPER_CRITICAL, centering, scale, 0.0, v2, v1_squared(beta), v2)
