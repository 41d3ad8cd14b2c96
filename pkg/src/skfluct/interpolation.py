"""Guerra-style interpolation between the coupled model and a cavity-field model.

At interpolation time t the pair couplings are scaled by sqrt(t) and every
site sees the field sqrt(1-t) * beta * sqrt(q) * g_i + h with independent
standard normal cavity variables g_i.  At t = 1 this is exactly the original
model; at t = 0 the spins decouple.

Two empirical facts about the overlap under the interpolated Gibbs measure
are checked at desk scale:

  * concentration: n <(R12 - q)^2>_t approaches c_t = 1 / (1 - beta^2 t) for
    weak fields, computed here exactly from the pair correlations;
  * the exponential moment bound
        E <exp(s n (R12 - q)^2)>_t <= 1 / sqrt(1 - 2s - 4 t beta^2)
    valid for s + 2 beta^2 < 1/2, with the left side evaluated by exact
    two-replica enumeration (4**n terms, so n is capped at 13).
"""
from __future__ import annotations

import math

import numpy as np

from .exact import EnumerationCap, coupling_matrix, gibbs_core, log_partition_core, _half_space_blocks, _pair_energy
from .model import DisorderSample, ModelParams

MAX_TWO_REPLICA_SPINS = 13


def c_target(beta: float, t: float) -> float:
    """Limiting overlap fluctuation n <(R12 - q)^2>_t, namely 1 / (1 - beta^2 t)."""
    return 1.0 / (1.0 - beta * beta * t)


def interpolated_fields(params: ModelParams, q: float, t: float, g_cavity: np.ndarray) -> np.ndarray:
    g = np.asarray(g_cavity, dtype=np.float64)
    if g.shape != (params.n,):
        raise ValueError("cavity field vector does not match n")
    return math.sqrt(1.0 - t) * params.beta * math.sqrt(max(q, 0.0)) * g + params.h


def interpolated_log_partition(
    sample: DisorderSample, g_cavity: np.ndarray, params: ModelParams, q: float, t: float
) -> float:
    a = math.sqrt(t) * coupling_matrix(sample, params)
    b = interpolated_fields(params, q, t, g_cavity)
    return log_partition_core(a, b)


def overlap_profile(
    sample: DisorderSample,
    g_cavity: np.ndarray,
    params: ModelParams,
    q: float,
    t_grid,
) -> list[tuple[float, float]]:
    """Exact n <(R12 - q)^2>_t along a grid of interpolation times."""
    a0 = coupling_matrix(sample, params)
    out = []
    for t in t_grid:
        b = interpolated_fields(params, q, t, g_cavity)
        summary = gibbs_core(math.sqrt(t) * a0, b, q)
        out.append((float(t), params.n * summary.overlap_centered_second))
    return out


def mgf_bound_check(
    sample: DisorderSample,
    g_cavity: np.ndarray,
    params: ModelParams,
    q: float,
    s: float,
    t: float,
) -> tuple[float, float]:
    """(lhs, rhs) of the overlap exponential-moment bound at one disorder sample.

    lhs = <exp(s n (R12 - q)^2)>_t by exact two-replica enumeration;
    rhs = (1 - 2s - 4 t beta^2)**(-1/2).  Requires s + 2 beta^2 < 1/2.
    """
    beta, n = params.beta, params.n
    if not s + 2.0 * beta * beta < 0.5:
        raise ValueError("bound requires s + 2 beta^2 < 1/2")
    if n > MAX_TWO_REPLICA_SPINS:
        raise EnumerationCap(f"two-replica enumeration capped at n = {MAX_TWO_REPLICA_SPINS}")
    rhs = 1.0 / math.sqrt(1.0 - 2.0 * s - 4.0 * t * beta * beta)

    a = math.sqrt(t) * coupling_matrix(sample, params)
    b = interpolated_fields(params, q, t, g_cavity)
    # Boltzmann weights of all 2**n configurations, normalized
    blocks = []
    spins = []
    for s_half in _half_space_blocks(n):
        e_pair = _pair_energy(s_half, a)
        e_field = s_half @ b
        blocks.append(np.concatenate([e_pair + e_field, e_pair - e_field]))
        spins.append(np.concatenate([s_half, -s_half]))
    energies = np.concatenate(blocks)
    configs = np.concatenate(spins)
    energies -= energies.max()
    weights = np.exp(energies)
    weights /= weights.sum()
    # tile the pair sum over R12 = (sigma . tau) / n
    lhs = 0.0
    chunk = 1024
    for lo in range(0, len(weights), chunk):
        overlaps = configs[lo : lo + chunk] @ configs.T / n
        boost = np.exp(s * n * (overlaps - q) ** 2)
        lhs += float(weights[lo : lo + chunk] @ boost @ weights)
    return lhs, rhs
