"""Reproducible random generation: Bernoulli tensors, Erdos-Renyi
k-uniform hypergraphs, and uniform sparsification.

Every decision is keyed by (base_seed, stream_id, coordinate), so identical
seeds give byte-identical canonical output regardless of iteration order or
parallelism.  For homogeneous sampling over large coordinate spaces a
geometric-skipping path over the lexicographic coordinate stream is used;
it matches the per-coordinate keyed path in distribution (not byte-for-byte),
and the per-coordinate path is the canonical one whenever determinism across
path choice matters.
"""

from __future__ import annotations

from math import comb

import numpy as np

from . import rng
from .core import (
    DenseProbability,
    Homogeneous,
    ProbabilityModel,
    SparseTensor,
    TensorShape,
    _coords_from_linear,
)
from .hypergraph import Hypergraph
from .rng import SeedSpec


def bernoulli_sample(
    shape: TensorShape,
    model: ProbabilityModel,
    seed: SeedSpec,
    method: str = "auto",
) -> SparseTensor:
    """Sample an order-k tensor with independent Bernoulli entries.

    Entry (i_1..i_k) is 1 exactly when its keyed uniform falls below its
    probability.  ``method`` ("auto" | "percoord" | "skip") selects the
    homogeneous code path; dense probability tables always use the
    per-coordinate path.
    """
    key = rng.stream_key(seed, rng.LBL_BERNOULLI)
    if isinstance(model, Homogeneous):
        positions = rng.bernoulli_positions(shape.ncoords, model.p, key, method=method)
        coords = _coords_from_linear(positions, shape.order, shape.dim)
        return SparseTensor(shape, coords, np.ones(len(positions)), presorted=True)
    if not isinstance(model, DenseProbability):
        raise TypeError(f"unsupported probability model: {type(model).__name__}")
    if model.shape != shape:
        raise ValueError(f"model shape {model.shape} mismatches {shape}")
    flat = model.table.reshape(-1)
    kept = []
    total = shape.ncoords
    for start in range(0, total, 1 << 20):
        ctr = np.arange(start, min(start + (1 << 20), total), dtype=np.uint64)
        u = rng.uniforms_at(key, ctr)
        kept.append(ctr[u < flat[start : start + len(ctr)]])
    positions = np.concatenate(kept) if kept else np.empty(0, dtype=np.uint64)
    coords = _coords_from_linear(positions, shape.order, shape.dim)
    return SparseTensor(shape, coords, np.ones(len(positions)), presorted=True)


def sparsify_uniform(t: SparseTensor, p: float, seed: SeedSpec) -> SparseTensor:
    """Keep each entry of ``t`` independently with probability p, value intact.

    The keep decision is keyed by the entry's coordinate, so it does not
    depend on the entry's position in the list.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if t.nnz == 0 or p == 1.0:
        return t
    if p == 0.0:
        return SparseTensor.empty(t.shape)
    key = rng.stream_key(seed, rng.LBL_SPARSIFY)
    u = rng.uniforms_at(key, t.linear_indices())
    keep = u < p
    return SparseTensor(t.shape, t.coords[keep], t.values[keep], presorted=True)


def er_hypergraph(k: int, n: int, p: float, seed: SeedSpec, method: str = "auto") -> Hypergraph:
    """Erdos-Renyi k-uniform hypergraph: each k-subset of [n] is an edge
    independently with probability p.  Edges are vertex subsets, so
    repeated-vertex tuples never occur."""
    if k > n:
        raise ValueError(f"k = {k} exceeds vertex count n = {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    key = rng.stream_key(seed, rng.LBL_HYPEREDGE)
    total = comb(n, k)
    ranks = rng.bernoulli_positions(total, p, key, method=method)
    edges = np.empty((len(ranks), k), dtype=np.int32)
    for row, r in enumerate(ranks):
        edges[row] = _unrank_combination(int(r), n, k)
    return Hypergraph(k, n, edges, presorted=True)


def _unrank_combination(rank: int, n: int, k: int) -> list:
    """Lexicographic unranking of k-subsets of [1, n]."""
    out = []
    v = 1
    r = rank
    for j in range(1, k + 1):
        while True:
            block = comb(n - v, k - j)
            if block <= r:
                r -= block
                v += 1
            else:
                break
        out.append(v)
        v += 1
    return out
