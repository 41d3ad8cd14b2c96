"""Exact weighted sums over simple paths and simple cycles of a dense graph.

The cluster statistics we need are multilinear functionals of a symmetric
weight matrix W with zero diagonal:

    cycle sum (length L):  sum over simple cycles of prod of W over edges,
                           each undirected cycle counted once,
    path sum  (k edges):   sum over simple paths of prod of W over edges,
                           each undirected path counted once,

plus endpoint-resolved variants used by the exchangeable-pair identities.
Enumerating individual clusters is hopeless at the sizes we run (the path
count grows like n**(k+1)), so each sum is evaluated by Moebius inversion
over the partition lattice of the pattern's vertex slots:

    sum over injective slot assignments
        = sum over set partitions pi of the slots of
              mu(pi) * (unrestricted contraction of the quotient pattern),

with mu(pi) = prod over blocks (-1)**(|B|-1) * (|B|-1)!.  Each unrestricted
quotient contraction is a single numpy einsum, so the total cost is
Bell(#slots) einsums of O(n**3) work each, independent of the cluster count,
and the whole computation batches over leading replica axes of W.

Patterns whose quotient puts two adjacent slots in one block vanish because
diag(W) = 0, and are skipped.  Integer weight matrices are contracted in
int64, which makes the count checks exact.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

_LETTERS = "abcdefghijkl"
_MAX_SLOTS = len(_LETTERS)

_path_cache: dict = {}


def _set_partitions(k: int):
    """All set partitions of range(k), as tuples of sorted tuples."""
    if k == 0:
        return [()]
    out = []

    def rec(i, blocks):
        if i == k:
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            b.append(i)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(0, [])
    return out


def _moebius(blocks) -> int:
    mu = 1
    for b in blocks:
        sz = len(b)
        mu *= (-1) ** (sz - 1) * math.factorial(sz - 1)
    return mu


@lru_cache(maxsize=None)
def _compile(num_slots: int, edges: tuple, outputs: tuple, skip_merged_outputs: bool):
    """Precompute the signed einsum terms for one slot pattern.

    Returns a list of (mu, subscripts, edge_subscript_pairs, ones_letters)
    where subscripts is the full einsum string; operands are one copy of W
    per pattern edge plus a ones vector per isolated output block.
    """
    if num_slots > _MAX_SLOTS:
        raise ValueError(f"pattern with {num_slots} slots exceeds the supported size")
    terms = []
    for blocks in _set_partitions(num_slots):
        block_of = {}
        for bi, b in enumerate(blocks):
            for s in b:
                block_of[s] = bi
        if skip_merged_outputs and len(outputs) == 2 and block_of[outputs[0]] == block_of[outputs[1]]:
            continue
        if any(block_of[u] == block_of[v] for (u, v) in edges):
            continue  # edge inside a block hits the zero diagonal
        letters = {bi: _LETTERS[bi] for bi in range(len(blocks))}
        in_subs = [f"...{letters[block_of[u]]}{letters[block_of[v]]}" for (u, v) in edges]
        touched = {block_of[u] for (u, v) in edges} | {block_of[v] for (u, v) in edges}
        ones_letters = []
        for out_slot in outputs:
            bi = block_of[out_slot]
            if bi not in touched:
                ones_letters.append(letters[bi])
                touched.add(bi)
        in_subs.extend(ones_letters)
        out_sub = "..." + "".join(letters[block_of[s]] for s in outputs)
        subscripts = ",".join(in_subs) + "->" + out_sub
        terms.append((_moebius(blocks), subscripts, len(edges), tuple(ones_letters)))
    return terms


def _einsum_with_cached_path(subscripts: str, operands):
    key = (subscripts, tuple(op.shape for op in operands))
    path = _path_cache.get(key)
    if path is None:
        path = np.einsum_path(subscripts, *operands, optimize="greedy")[0]
        _path_cache[key] = path
    return np.einsum(subscripts, *operands, optimize=path)


def _evaluate(w: np.ndarray, num_slots: int, edges: tuple, outputs: tuple, skip_merged_outputs: bool):
    w = np.asarray(w)
    if w.ndim < 2 or w.shape[-1] != w.shape[-2]:
        raise ValueError("weight matrix must have shape (..., n, n)")
    n = w.shape[-1]
    out_shape = w.shape[:-2] + (n,) * len(outputs)
    acc = np.zeros(out_shape, dtype=w.dtype if np.issubdtype(w.dtype, np.integer) else np.float64)
    ones = np.ones(n, dtype=acc.dtype)
    for mu, subscripts, num_edges, ones_letters in _compile(num_slots, edges, outputs, skip_merged_outputs):
        operands = [w] * num_edges + [ones] * len(ones_letters)
        term = _einsum_with_cached_path(subscripts, operands)
        if mu == 1:
            acc += term
        elif mu == -1:
            acc -= term
        else:
            acc += mu * term
    return acc


# ---------------------------------------------------------------------------
# Public sums


def simple_path_matrix(w: np.ndarray, num_edges: int) -> np.ndarray:
    """Matrix M with M[..., i, j] = sum over simple paths i -> j with num_edges edges.

    Partitions merging the two endpoint slots only produce diagonal garbage,
    so they are skipped and the diagonal is zeroed instead.
    """
    if num_edges < 1:
        raise ValueError("paths need at least one edge")
    slots = num_edges + 1
    edges = tuple((t, t + 1) for t in range(num_edges))
    out = _evaluate(w, slots, edges, (0, num_edges), skip_merged_outputs=True)
    idx = np.arange(w.shape[-1])
    out[..., idx, idx] = 0
    return out


def simple_path_sum(w: np.ndarray, num_edges: int) -> np.ndarray:
    """Sum of weight products over unordered simple paths with num_edges edges."""
    m = simple_path_matrix(w, num_edges)
    total = m.sum(axis=(-1, -2))
    if np.issubdtype(m.dtype, np.integer):
        return total // 2
    return total / 2.0


def simple_cycle_sum(w: np.ndarray, length: int) -> np.ndarray:
    """Sum of weight products over unordered simple cycles of the given length."""
    if length < 3:
        raise ValueError("simple cycles have length >= 3")
    edges = tuple((t, (t + 1) % length) for t in range(length))
    total = _evaluate(w, length, edges, (), skip_merged_outputs=False)
    if np.issubdtype(np.asarray(total).dtype, np.integer):
        return total // (2 * length)
    return total / (2.0 * length)


def split_pair_matrix(w: np.ndarray, a: int, b: int) -> np.ndarray:
    """M[..., i, j] = sum over vertex-disjoint chain pairs hanging off i and j.

    One simple chain of `a` edges ends at i, another of `b` edges starts at j,
    and all a + b + 2 vertices (including i and j) are distinct.  This is the
    weight sum of the two residual arcs left when one edge of a simple path is
    removed, which is what the exchangeable-pair identity for path clusters
    needs.
    """
    if a < 0 or b < 0:
        raise ValueError("chain lengths must be nonnegative")
    slots = a + b + 2
    edges = tuple((t, t + 1) for t in range(a)) + tuple((a + 1 + t, a + 2 + t) for t in range(b))
    out = _evaluate(w, slots, edges, (a, a + 1), skip_merged_outputs=True)
    idx = np.arange(w.shape[-1])
    out[..., idx, idx] = 0
    return out


def path_completion_matrix(w: np.ndarray, num_edges: int) -> np.ndarray:
    """M[..., i, j] = sum over residues of simple (num_edges+1)-edge paths through edge (i, j).

    Summing split_pair_matrix over all splits a + b = num_edges of the removed
    edge's position inside the path.
    """
    n = w.shape[-1]
    out = np.zeros(w.shape[:-2] + (n, n))
    for a in range(num_edges + 1):
        out += split_pair_matrix(w, a, num_edges - a)
    return out


# ---------------------------------------------------------------------------
# Exact counts (integer arithmetic end to end)


def _ones_offdiag(n: int) -> np.ndarray:
    m = np.ones((n, n), dtype=np.int64)
    np.fill_diagonal(m, 0)
    return m


def simple_path_count(n: int, num_edges: int) -> int:
    return int(simple_path_sum(_ones_offdiag(n), num_edges))


def simple_cycle_count(n: int, length: int) -> int:
    return int(simple_cycle_sum(_ones_offdiag(n), length))


def simple_path_count_matrix(adjacency: np.ndarray, num_edges: int) -> int:
    """Path count for an arbitrary 0/1 adjacency matrix, exact in int64."""
    return int(simple_path_sum(np.asarray(adjacency, dtype=np.int64), num_edges))


def simple_cycle_count_matrix(adjacency: np.ndarray, length: int) -> int:
    return int(simple_cycle_sum(np.asarray(adjacency, dtype=np.int64), length))


def falling_factorial(n: int, k: int) -> int:
    out = 1
    for t in range(k):
        out *= n - t
    return out
