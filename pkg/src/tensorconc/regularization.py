"""Tuple-degree computation, degree-threshold regularization, and the
three-step bounded-degree expander construction.

The degree of a (k-m)-tuple is the number of stored entries sharing that
prefix (equal to the value sum for 0/1 tensors).  Regularization zeroes
every entry whose prefix degree strictly exceeds 2 * n^m * p; ties at the
threshold are kept.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import SparseTensor


@dataclass(frozen=True)
class DegreeMap:
    """Counts per (k-m)-prefix; prefixes with zero degree are implicit."""

    prefix_order: int
    prefixes: np.ndarray  # (num, prefix_order) int32, sorted lexicographically
    counts: np.ndarray  # (num,) int64

    @property
    def max_degree(self) -> int:
        return int(self.counts.max()) if self.counts.size else 0

    def degree(self, prefix) -> int:
        prefix = np.asarray(prefix, dtype=np.int32)
        if self.prefixes.size == 0:
            return 0
        idx = np.flatnonzero(np.all(self.prefixes == prefix, axis=1))
        return int(self.counts[idx[0]]) if idx.size else 0

    def total(self) -> int:
        return int(self.counts.sum())


def degree_map(t: SparseTensor, m: int) -> DegreeMap:
    """Degrees of all (k-m)-prefixes in one pass over the sorted entries."""
    k = t.shape.order
    if not 1 <= m <= k - 1:
        raise ValueError(f"m must be in [1, {k - 1}], got {m}")
    plen = k - m
    if t.nnz == 0:
        return DegreeMap(plen, np.empty((0, plen), dtype=np.int32), np.empty(0, dtype=np.int64))
    pref = t.coords[:, :plen]
    # entries are lexicographically sorted, so equal prefixes are contiguous
    new = np.empty(t.nnz, dtype=bool)
    new[0] = True
    new[1:] = np.any(pref[1:] != pref[:-1], axis=1)
    starts = np.flatnonzero(new)
    counts = np.diff(np.append(starts, t.nnz)).astype(np.int64)
    return DegreeMap(plen, np.ascontiguousarray(pref[starts]), counts)


@dataclass(frozen=True)
class RegularizationResult:
    regularized: SparseTensor
    removed: np.ndarray  # (|S|, k-m) int32, sorted
    threshold: float
    m: int
    in_guarantee_regime: bool

    @property
    def removed_count(self) -> int:
        return self.removed.shape[0]


def regularize(t: SparseTensor, m: int, p: float) -> RegularizationResult:
    """Remove all entries whose (k-m)-prefix degree exceeds 2 * n^m * p.

    The guarantee regime is k/2 <= m <= k-1; other m still run but are
    flagged (and warned) as outside it.
    """
    k, n = t.shape.order, t.shape.dim
    if not 1 <= m <= k - 1:
        raise ValueError(f"m must be in [1, {k - 1}], got {m}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    in_regime = 2 * m >= k
    if not in_regime:
        warnings.warn(
            f"regularization with m={m} < k/2={k / 2} is outside the guarantee regime",
            stacklevel=2,
        )
    threshold = 2.0 * n**m * p
    dm = degree_map(t, m)
    bad = dm.counts > threshold
    removed = np.ascontiguousarray(dm.prefixes[bad])
    if removed.shape[0] == 0 or t.nnz == 0:
        return RegularizationResult(t, removed, threshold, m, in_regime)
    plen = k - m
    base = np.int64(n)
    pref_lin = np.zeros(t.nnz, dtype=np.int64)
    bad_lin = np.zeros(removed.shape[0], dtype=np.int64)
    for j in range(plen):
        pref_lin = pref_lin * base + (t.coords[:, j].astype(np.int64) - 1)
        bad_lin = bad_lin * base + (removed[:, j].astype(np.int64) - 1)
    keep = ~np.isin(pref_lin, bad_lin)
    out = SparseTensor(t.shape, t.coords[keep], t.values[keep], presorted=True)
    return RegularizationResult(out, removed, threshold, m, in_regime)


@dataclass(frozen=True)
class RemovedCountCheck:
    count: int
    bound: float
    within: bool


def removed_count_check(result: RegularizationResult, n: int, p: float) -> RemovedCountCheck:
    """Compare |removed prefixes| against 1 / (n^(2m-k) * p)."""
    m = result.m
    k = result.regularized.shape.order
    if not (2 * m >= k and m <= k - 1):
        raise ValueError(f"removed-count bound needs k/2 <= m <= k-1, got m={m}, k={k}")
    bound = 1.0 / (n ** (2 * m - k) * p)
    count = result.removed_count
    return RemovedCountCheck(count, bound, count <= bound)


def _validate_symmetric_adjacency(t: SparseTensor) -> None:
    k = t.shape.order
    if t.nnz == 0:
        return
    if np.any(np.sort(t.coords, axis=1)[:, :-1] == np.sort(t.coords, axis=1)[:, 1:]):
        raise ValueError("adjacency tensor has an entry with repeated indices")
    srt = np.sort(t.coords, axis=1)
    order = np.lexsort(tuple(srt[:, j] for j in range(k - 1, -1, -1)))
    srt = srt[order]
    vals = t.values[order]
    new = np.empty(t.nnz, dtype=bool)
    new[0] = True
    new[1:] = np.any(srt[1:] != srt[:-1], axis=1)
    starts = np.flatnonzero(new)
    sizes = np.diff(np.append(starts, t.nnz))
    fact = math.factorial(k)
    if np.any(sizes != fact):
        raise ValueError("input tensor is not symmetric: incomplete permutation orbit")
    for s, c in zip(starts, sizes):
        if not np.all(vals[s : s + c] == vals[s]):
            raise ValueError("input tensor is not symmetric: orbit values differ")


def expander_construct(t: SparseTensor, p: float) -> SparseTensor:
    """Three-step bounded-degree regularization of a symmetric adjacency tensor.

    1. keep only strictly increasing coordinates;
    2. zero every first-mode slice whose degree exceeds 2 * n^(k-1) * p;
    3. symmetrize by summing over all index permutations.

    Each surviving edge has exactly one increasing representative, so the
    output has 0/1 values on distinct-index coordinates (asserted).
    """
    k, n = t.shape.order, t.shape.dim
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    _validate_symmetric_adjacency(t)
    if t.nnz == 0:
        return SparseTensor.empty(t.shape)
    increasing = np.all(np.diff(t.coords, axis=1) > 0, axis=1)
    coords = t.coords[increasing]
    values = t.values[increasing]
    threshold = 2.0 * n ** (k - 1) * p
    first_degree = np.bincount(coords[:, 0], minlength=n + 1)
    bad = first_degree > threshold
    keep = ~bad[coords[:, 0]]
    coords, values = coords[keep], values[keep]
    if coords.shape[0] == 0:
        return SparseTensor.empty(t.shape)
    perms = list(itertools.permutations(range(k)))
    sym_coords = np.concatenate([coords[:, perm] for perm in perms], axis=0)
    sym_values = np.tile(values, len(perms))
    out = SparseTensor(t.shape, sym_coords, sym_values)
    if out.nnz and not np.all(np.isin(out.values, (0.0, 1.0))):
        raise AssertionError("expander construction produced non-0/1 values")
    return out
