"""Counter-based keyed randomness.

Every random decision in this package is a pure function of
``(base_seed, stream_id, label, counter)``: a 64-bit key is derived from the
seed pair and an operation label, and the counter (a coordinate's linear
index, a draw index, a restart number, ...) is hashed through a splitmix64
finalizer.  There is no sequential generator state, so results are identical
under any iteration order or degree of parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# operation labels; distinct values keep substreams independent
LBL_BERNOULLI = 0x01
LBL_SPARSIFY = 0x02
LBL_HYPEREDGE = 0x03
LBL_POWER_INIT = 0x04
LBL_HOPM_INIT = 0x05
LBL_SLICE = 0x06
LBL_SUBSET_SIZE = 0x07
LBL_SUBSET_MEMBERS = 0x08

_BLOCK = 1 << 20


@dataclass(frozen=True)
class SeedSpec:
    """Seed pair: a base seed plus a stream id (typically the trial index)."""

    base_seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        for name in ("base_seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= int(v) < 1 << 64):
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v}")


def _fin_int(z: int) -> int:
    z &= _MASK64
    z ^= z >> 30
    z = (z * _MIX1) & _MASK64
    z ^= z >> 27
    z = (z * _MIX2) & _MASK64
    z ^= z >> 31
    return z


def _fin_arr(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    return z


def stream_key(seed: SeedSpec, label: int) -> int:
    """64-bit key for one (seed, operation) substream."""
    k = _fin_int(seed.base_seed + _GAMMA)
    k = _fin_int(k ^ _fin_int(seed.stream_id + 3 * _GAMMA))
    k = _fin_int(k ^ _fin_int(label + 5 * _GAMMA))
    return k


def uniforms_at(key: int, counters: np.ndarray) -> np.ndarray:
    """Uniforms in [0, 1) at the given uint64 counters."""
    z = counters.astype(np.uint64) * np.uint64(_GAMMA) + np.uint64(key)
    return (_fin_arr(z) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def uniforms_open_at(key: int, counters: np.ndarray) -> np.ndarray:
    """Uniforms in (0, 1] at the given uint64 counters (safe for log)."""
    z = counters.astype(np.uint64) * np.uint64(_GAMMA) + np.uint64(key)
    h = (_fin_arr(z) >> np.uint64(11)) + np.uint64(1)
    return h.astype(np.float64) * 2.0**-53


def uniform_block(key: int, start: int, count: int) -> np.ndarray:
    return uniforms_at(key, np.arange(start, start + count, dtype=np.uint64))


def bernoulli_positions(total: int, p: float, key: int, method: str = "auto") -> np.ndarray:
    """Sorted uint64 positions in [0, total) kept by independent Bernoulli(p).

    ``percoord`` evaluates one keyed uniform per position (the canonical
    stream); ``skip`` draws geometric gaps over a sequential draw counter
    and costs O(total * p) expected.  The two are distributionally identical
    but not byte-identical.  ``auto`` picks percoord for small spaces and
    skip otherwise; the choice depends only on (total, p), never the seed.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if total < 0 or total >= 1 << 63:
        raise ValueError(f"coordinate space size out of range: {total}")
    if total == 0 or p == 0.0:
        return np.empty(0, dtype=np.uint64)
    if p == 1.0:
        return np.arange(total, dtype=np.uint64)
    if method == "auto":
        method = "percoord" if total <= (1 << 21) else "skip"
    if method == "percoord":
        return _positions_percoord(total, p, key)
    if method == "skip":
        return _positions_skip(total, p, key)
    raise ValueError(f"unknown sampling method: {method!r}")


def _positions_percoord(total: int, p: float, key: int) -> np.ndarray:
    kept = []
    for start in range(0, total, _BLOCK):
        ctr = np.arange(start, min(start + _BLOCK, total), dtype=np.uint64)
        u = uniforms_at(key, ctr)
        kept.append(ctr[u < p])
    return np.concatenate(kept) if kept else np.empty(0, dtype=np.uint64)


def _positions_skip(total: int, p: float, key: int) -> np.ndarray:
    log1mp = math.log1p(-p)
    block = max(1024, min(_BLOCK, int(total * p * 1.25) + 64))
    out = []
    pos = -1
    drawn = 0
    while pos < total:
        ctr = np.arange(drawn, drawn + block, dtype=np.uint64)
        u = uniforms_open_at(key, ctr)
        steps = np.floor(np.log(u) / log1mp).astype(np.int64) + 1
        positions = pos + np.cumsum(steps)
        out.append(positions[positions < total].astype(np.uint64))
        pos = int(positions[-1])
        drawn += block
    return np.concatenate(out)


def sample_without_replacement(key: int, counter_base: int, n: int, size: int) -> np.ndarray:
    """Deterministic size-subset of [1, n], sorted ascending (1-based)."""
    if not 1 <= size <= n:
        raise ValueError(f"subset size {size} out of range [1, {n}]")
    u = uniforms_at(key, np.arange(counter_base, counter_base + n, dtype=np.uint64))
    picked = np.argsort(u, kind="stable")[:size] + 1
    return np.sort(picked).astype(np.int32)
