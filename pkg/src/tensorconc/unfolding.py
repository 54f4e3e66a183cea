"""Mode partitions and the induced tensor unfolding (matricization).

A partition pi = {B_1, ..., B_l} of the mode set [k] maps each coordinate
(i_1, ..., i_k) to an l-tuple through

    m_j = 1 + sum_{r in B_j} (i_r - 1) * n^{pos(r)},

where pos(r) is the rank of r within its (ascending) block: the first block
member is the least significant digit.  phi_pi is a bijection between [n]^k
and the product of the unfolded ranges, so unfolding permutes the entry list
and preserves the Frobenius norm exactly, while the spectral norm can only
grow.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import OffsetTensor, SparseTensor, TensorLike, as_offset


class Partition:
    """Disjoint nonempty blocks of 1-based mode indices covering [k].

    Block order is significant (it fixes the unfolded mode order); members
    within a block are kept sorted ascending.
    """

    __slots__ = ("blocks", "order")

    def __init__(self, blocks: Sequence[Sequence[int]]):
        clean = tuple(tuple(sorted(int(i) for i in b)) for b in blocks)
        if not clean or any(len(b) == 0 for b in clean):
            raise ValueError("partition blocks must be nonempty")
        flat = [i for b in clean for i in b]
        k = len(flat)
        if sorted(flat) != list(range(1, k + 1)):
            raise ValueError(f"blocks must partition [1..k], got {clean}")
        object.__setattr__(self, "blocks", clean)
        object.__setattr__(self, "order", k)

    def __setattr__(self, name, value):
        raise AttributeError("Partition is immutable")

    @property
    def arity(self) -> int:
        return len(self.blocks)

    def dims(self, n: int) -> tuple:
        return tuple(n ** len(b) for b in self.blocks)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"Partition({list(list(b) for b in self.blocks)})"

    def to_json_blocks(self) -> list:
        return [list(b) for b in self.blocks]

    @classmethod
    def from_json_blocks(cls, blocks) -> "Partition":
        return cls(blocks)


def balanced_partition(k: int, m: int) -> Partition:
    """Two blocks {1..k-m} and {k-m+1..k}; the second has size m."""
    if not 1 <= m <= k - 1:
        raise ValueError(f"m must be in [1, {k - 1}], got {m}")
    return Partition([range(1, k - m + 1), range(k - m + 1, k + 1)])


def multiway_partition(k: int, m: int) -> Partition:
    """floor(k/m) consecutive blocks of size m plus a residual block of size k mod m."""
    if not (1 <= m and 2 * m < k):
        raise ValueError(f"m must satisfy 1 <= m < k/2, got m={m}, k={k}")
    blocks = []
    start = 1
    while start <= k:
        stop = min(start + m - 1, k)
        blocks.append(range(start, stop + 1))
        start = stop + 1
    return Partition(blocks)


def _block_strides(block: tuple, n: int) -> np.ndarray:
    return (np.uint64(n) ** np.arange(len(block), dtype=np.uint64)).astype(np.uint64)


def phi(partition: Partition, coord: Sequence[int], n: int) -> tuple:
    """Map one 1-based coordinate through the unfolding bijection."""
    coord = tuple(int(i) for i in coord)
    if len(coord) != partition.order:
        raise ValueError(f"coordinate length {len(coord)} != order {partition.order}")
    if any(not 1 <= i <= n for i in coord):
        raise ValueError(f"coordinate {coord} out of range [1, {n}]")
    out = []
    for block in partition.blocks:
        m = 1
        stride = 1
        for r in block:
            m += (coord[r - 1] - 1) * stride
            stride *= n
        out.append(m)
    return tuple(out)


def phi_inverse(partition: Partition, unfolded: Sequence[int], n: int) -> tuple:
    """Invert ``phi``: decode each unfolded index back into its block's digits."""
    unfolded = tuple(int(m) for m in unfolded)
    if len(unfolded) != partition.arity:
        raise ValueError(f"expected {partition.arity} indices, got {len(unfolded)}")
    coord = [0] * partition.order
    for block, m in zip(partition.blocks, unfolded):
        if not 1 <= m <= n ** len(block):
            raise ValueError(f"unfolded index {m} out of range [1, {n ** len(block)}]")
        rem = m - 1
        for r in block:
            coord[r - 1] = rem % n + 1
            rem //= n
    return tuple(coord)


def phi_array(partition: Partition, coords: np.ndarray, n: int) -> np.ndarray:
    """Vectorized ``phi`` over an (nnz, k) coordinate array; int64 output."""
    out = np.empty((coords.shape[0], partition.arity), dtype=np.int64)
    for j, block in enumerate(partition.blocks):
        cols = coords[:, [r - 1 for r in block]].astype(np.uint64) - np.uint64(1)
        strides = _block_strides(block, n)
        out[:, j] = (cols * strides).sum(axis=1).astype(np.int64) + 1
    return out


class UnfoldedView:
    """Lazy unfolding of an OffsetTensor through a partition.

    Entry values and the background are untouched; only coordinates are
    remapped, and the remap is computed on first use.  ``canonical_entries``
    re-sorts into the unfolded lexicographic order.
    """

    __slots__ = ("source", "partition", "dims", "_coords")

    def __init__(self, source: OffsetTensor, partition: Partition):
        if partition.order != source.shape.order:
            raise ValueError(
                f"partition of [{partition.order}] cannot unfold an order-"
                f"{source.shape.order} tensor"
            )
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "partition", partition)
        object.__setattr__(self, "dims", partition.dims(source.shape.dim))
        object.__setattr__(self, "_coords", None)

    def __setattr__(self, name, value):
        raise AttributeError("UnfoldedView is immutable")

    @property
    def arity(self) -> int:
        return len(self.dims)

    @property
    def background(self) -> float:
        return self.source.background

    @property
    def values(self) -> np.ndarray:
        return self.source.sparse.values

    @property
    def coords(self) -> np.ndarray:
        """Unfolded coordinates in the source entry order (1-based, int64)."""
        if self._coords is None:
            mapped = phi_array(self.partition, self.source.sparse.coords, self.source.shape.dim)
            mapped.flags.writeable = False
            object.__setattr__(self, "_coords", mapped)
        return self._coords

    @property
    def nnz(self) -> int:
        return self.source.nnz

    def frobenius_sq(self) -> float:
        """Frobenius norm squared, computed analytically (bijection preserves it)."""
        v = self.values
        total = float(np.dot(v, v))
        bg = self.background
        if bg != 0.0:
            ncoords = 1
            for d in self.dims:
                ncoords *= d
            total += 2.0 * bg * float(v.sum()) + bg * bg * ncoords
        return total

    def canonical_entries(self) -> tuple:
        """(coords, values) sorted lexicographically in unfolded coordinates."""
        coords, values = self.coords, self.values
        if coords.shape[0] > 1:
            order = np.lexsort(tuple(coords[:, j] for j in range(self.arity - 1, -1, -1)))
            coords, values = coords[order], values[order]
        return coords, values

    def group_modes(self, split: int) -> "GroupedMatrix":
        """Merge unfolded modes [1..split] and [split+1..l] into a matrix.

        Mixed-radix merge with the first mode least significant, matching the
        digit order of ``phi``; equivalent to unfolding the source by the
        coarsened two-block partition.
        """
        if not 1 <= split < self.arity:
            raise ValueError(f"split must be in [1, {self.arity - 1}]")
        coords = self.coords
        rows = np.zeros(self.nnz, dtype=np.int64)
        cols = np.zeros(self.nnz, dtype=np.int64)
        stride = 1
        nrows = ncols = 1
        for j in range(split):
            rows += (coords[:, j] - 1) * stride
            stride *= self.dims[j]
            nrows *= self.dims[j]
        stride = 1
        for j in range(split, self.arity):
            cols += (coords[:, j] - 1) * stride
            stride *= self.dims[j]
            ncols *= self.dims[j]
        return GroupedMatrix(nrows, ncols, rows, cols, self.values, self.background)

    def __repr__(self):
        return f"UnfoldedView(dims={self.dims}, nnz={self.nnz}, background={self.background!r})"


class GroupedMatrix:
    """Rectangular sparse matrix plus constant background (0-based indices)."""

    __slots__ = ("nrows", "ncols", "rows", "cols", "values", "background")

    def __init__(self, nrows, ncols, rows, cols, values, background):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.rows = rows
        self.cols = cols
        self.values = values
        self.background = float(background)


def unfold(t: TensorLike, partition: Partition) -> UnfoldedView:
    """Unfold a tensor through a partition of its modes."""
    return UnfoldedView(as_offset(t), partition)


def unfolded_to_sparse(view: UnfoldedView) -> "SparseTensor":
    """Materialize an arity-k view with uniform dims back into a SparseTensor.

    Only valid when every unfolded mode has the same dimension (e.g. the
    identity partition or k = 2 with square blocks).
    """
    from .core import TensorShape

    dims = set(view.dims)
    if len(dims) != 1:
        raise ValueError(f"unfolded dims {view.dims} are not uniform")
    coords, values = view.canonical_entries()
    shape = TensorShape(view.arity, view.dims[0])
    return SparseTensor(shape, coords.astype(np.int64), values, presorted=True)
