"""Empirical verification of the concentration-proof machinery: lattice
nets, light/heavy tuple decomposition, bounded-degree and bounded-discrepancy
checks, dyadic magnitude profiles, and the Bernoulli KL-divergence bound.

These are desk-scale instruments: gated, enumerable instances where the
quantities inside the probabilistic argument can be computed exactly and
compared against their claimed bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DenseProbability,
    Homogeneous,
    ProbabilityModel,
    SparseTensor,
    TensorLike,
    VectorTuple,
    as_offset,
    multilinear_form,
)
from .hypergraph import _BoxCounter, box_sum, sample_subset_families
from .rng import SeedSpec
from .spectral import PowerIterConfig, hopm_lower


@dataclass(frozen=True)
class LemmaConstants:
    """Tunable constants for the degree / discrepancy / net checks."""

    c1: float = 3.0
    c2: float = 20.0
    c3: float = 20.0
    delta: float = 0.5

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            if getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must exceed 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class LatticeNet:
    """Grid points x in the unit ball with sqrt(n) * x_i / delta integral."""

    n: int
    delta: float
    points: np.ndarray  # (N, n) float64, lexicographically sorted integer grid

    @property
    def size(self) -> int:
        return self.points.shape[0]


def lattice_net(n: int, delta: float) -> LatticeNet:
    """Exhaustive enumeration of the lattice net; gated to n <= 4
    (cardinality grows like exp(n * log(7/delta)))."""
    if not 1 <= n <= 4:
        raise ValueError(f"lattice net enumeration is gated to n <= 4, got {n}")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    radius = math.sqrt(n) / delta
    bound = int(math.floor(radius + 1e-12))
    axes = [np.arange(-bound, bound + 1, dtype=np.int64)] * n
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    sq = (grid.astype(np.float64) ** 2).sum(axis=1)
    keep = sq * delta * delta <= n * (1.0 + 1e-12)
    points = grid[keep].astype(np.float64) * (delta / math.sqrt(n))
    points.flags.writeable = False
    return LatticeNet(n, delta, points)


@dataclass(frozen=True)
class NetSupremumRecord:
    sup_net: float
    bound: float  # (1-delta)^{-k} * sup_net
    lower: float  # achieved-form estimate of the spectral norm
    within: bool
    slack: float


def net_supremum_check(
    t: TensorLike,
    delta: float = 0.5,
    config: PowerIterConfig = PowerIterConfig(),
) -> NetSupremumRecord:
    """Exhaustive check that (1-delta)^{-k} * sup over net tuples dominates
    the achieved spectral lower bound.  Gated to n <= 3, k <= 3."""
    t = as_offset(t)
    k, n = t.shape.order, t.shape.dim
    if n > 3 or k > 3:
        raise ValueError(f"net supremum check gated to n <= 3, k <= 3, got n={n}, k={k}")
    net = lattice_net(n, delta)
    y = net.points
    dense = t.materialize()
    if k == 2:
        sup = float(np.abs(y @ dense @ y.T).max()) if net.size else 0.0
    else:
        sup = 0.0
        for a in range(net.size):
            m = np.tensordot(y[a], dense, axes=(0, 0))
            sup = max(sup, float(np.abs(y @ m @ y.T).max()))
    bound = (1.0 - delta) ** (-k) * sup
    lower = hopm_lower(t, config).value
    return NetSupremumRecord(sup, bound, lower, lower <= bound + 1e-8, bound - lower)


@dataclass(frozen=True)
class TupleSplit:
    """Coordinates split by rank-1 product magnitude at sqrt(np)/n.

    Heavy tuples (|prod_j y_{j,i_j}| strictly above the threshold) are
    enumerated explicitly; light tuples are the implicit complement.
    light/heavy contributions are the signed sums of the products alone.
    """

    threshold: float
    heavy_coords: np.ndarray  # (H, k) int32, 1-based
    heavy_products: np.ndarray  # (H,) float64
    light_contribution: float
    heavy_contribution: float

    @property
    def heavy_count(self) -> int:
        return self.heavy_coords.shape[0]

    def is_heavy(self, coord) -> bool:
        coord = np.asarray(coord, dtype=np.int32)
        if self.heavy_coords.size == 0:
            return False
        return bool(np.any(np.all(self.heavy_coords == coord, axis=1)))


def split_tuples(ys, n: int, p: float) -> TupleSplit:
    """Enumerate heavy tuples by per-mode magnitude pruning.

    Modes are scanned in descending |y| order; a branch is pruned as soon as
    the running |product| times the remaining modes' maxima cannot exceed
    the threshold.  Cost is output-sensitive.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    vecs = list(ys.vectors) if isinstance(ys, VectorTuple) else [np.asarray(v, float) for v in ys]
    k = len(vecs)
    for v in vecs:
        if v.shape != (n,):
            raise ValueError("vectors must have length n")
    threshold = math.sqrt(n * p) / n
    orders = [np.argsort(-np.abs(v), kind="stable") for v in vecs]
    sorted_abs = [np.abs(v)[o] for v, o in zip(vecs, orders)]
    suffix_max = np.ones(k + 1)
    for j in range(k - 1, -1, -1):
        mx = sorted_abs[j][0] if n else 0.0
        suffix_max[j] = suffix_max[j + 1] * mx
    heavy = []
    prods = []

    def descend(j: int, idx: list, prod: float):
        if abs(prod) * suffix_max[j] <= threshold:
            return
        if j == k:
            heavy.append([orders[jj][ii] + 1 for jj, ii in enumerate(idx)])
            prods.append(prod)
            return
        for pos in range(n):
            new = prod * vecs[j][orders[j][pos]]
            if abs(new) * suffix_max[j + 1] <= threshold:
                break  # scanned in descending |y|: later positions only smaller
            descend(j + 1, idx + [pos], new)

    descend(0, [], 1.0)
    heavy_coords = np.array(heavy, dtype=np.int32).reshape(len(heavy), k)
    heavy_products = np.array(prods, dtype=np.float64)
    if len(heavy) > 1:
        order = np.lexsort(tuple(heavy_coords[:, j] for j in range(k - 1, -1, -1)))
        heavy_coords, heavy_products = heavy_coords[order], heavy_products[order]
    total = 1.0
    for v in vecs:
        total *= float(v.sum())
    heavy_sum = float(heavy_products.sum())
    return TupleSplit(threshold, heavy_coords, heavy_products, total - heavy_sum, heavy_sum)


@dataclass(frozen=True)
class LightContributionRecord:
    light_sum: float
    ratio: float  # |light sum| / sqrt(np)
    c: float
    within: bool
    heavy_count: int


def light_contribution_check(
    w: TensorLike, ys, n: int, p: float, c: float
) -> LightContributionRecord:
    """|sum over light tuples of prod(y) * w| / sqrt(np), versus constant c.

    The light sum is the full form value minus the explicitly enumerated
    heavy part, so the tensor is never densified.
    """
    w = as_offset(w)
    split = split_tuples(ys, n, p)
    total = multilinear_form(w, ys)
    heavy_part = 0.0
    if split.heavy_count:
        vals = np.full(split.heavy_count, w.background)
        if w.nnz:
            heavy_lin = np.zeros(split.heavy_count, dtype=np.uint64)
            base = np.uint64(n)
            for j in range(w.shape.order):
                heavy_lin = heavy_lin * base + (split.heavy_coords[:, j].astype(np.uint64) - np.uint64(1))
            tensor_lin = w.sparse.linear_indices()
            pos = np.searchsorted(tensor_lin, heavy_lin)
            pos = np.minimum(pos, len(tensor_lin) - 1)
            hit = tensor_lin[pos] == heavy_lin
            vals[hit] += w.sparse.values[pos[hit]]
        heavy_part = float(np.dot(split.heavy_products, vals))
    light_sum = total - heavy_part
    ratio = abs(light_sum) / math.sqrt(n * p)
    return LightContributionRecord(light_sum, ratio, c, ratio <= c, split.heavy_count)


@dataclass(frozen=True)
class BoundedDegreeRecord:
    max_degree: int
    bound: float  # c1 * n * p
    within: bool


def bounded_degree_check(t: SparseTensor, p: float, c1: float) -> BoundedDegreeRecord:
    """Maximum (k-1)-prefix degree versus c1 * n * p."""
    from .regularization import degree_map

    dm = degree_map(t, 1)
    bound = c1 * t.shape.dim * p
    return BoundedDegreeRecord(dm.max_degree, bound, dm.max_degree <= bound)


@dataclass(frozen=True)
class DiscrepancyTrial:
    sizes: tuple
    e: float
    mu_bar: float
    lam: float
    case1: bool
    case2: bool


@dataclass
class DiscrepancyReport:
    """Per-family evaluation of the two bounded-discrepancy cases.

    Case 1: e / mu_bar <= exp(1) * c2.
    Case 2: e * log(e / mu_bar) <= c3 * |I_k| * log(n / |I_k|), with the
    conventions 0 * log(.) = 0 and e = 0 => case 2 holds.

    ``fitted_c2`` is the smallest c2 covering every family that case 2 (at
    the given c3) does not; ``fitted_c3`` symmetrically.  A joint minimal
    pair is not unique, so both one-sided minima are reported.
    """

    c2: float
    c3: float
    trials: list = field(default_factory=list)
    violations: int = 0
    fitted_c2: float = 0.0
    fitted_c3: float = 0.0

    @property
    def within(self) -> bool:
        return self.violations == 0


def _discrepancy_cases(e: float, mu_bar: float, n: int, top: int, c2: float, c3: float):
    lam = e / mu_bar if mu_bar > 0 else float("inf")
    case1 = lam <= math.e * c2
    if e <= 0.0:
        return lam, case1, True, 0.0
    lhs2 = e * math.log(lam) if lam > 0 else float("-inf")
    if lhs2 <= 0.0:
        return lam, case1, True, 0.0
    denom = top * math.log(n / top)
    if denom <= 0.0:
        return lam, case1, False, float("inf")
    return lam, case1, lhs2 <= c3 * denom, lhs2 / denom


def discrepancy_check(
    t: SparseTensor,
    p: float,
    c2: float,
    c3: float,
    families,
    seed: SeedSpec = SeedSpec(),
) -> DiscrepancyReport:
    """Evaluate both discrepancy cases over index-set families.

    ``families`` is either an integer (that many sampled families, sizes
    log-uniform, keyed by seed) or an explicit list of k-tuples of index
    sets.  Sets are sorted by size internally so |I_1| <= ... <= |I_k|.
    """
    k, n = t.shape.order, t.shape.dim
    if isinstance(families, int):
        fams = sample_subset_families(k, n, families, seed)
    else:
        fams = [tuple(np.asarray(s, dtype=np.int64) for s in fam) for fam in families]
    report = DiscrepancyReport(c2=c2, c3=c3)
    need_c2 = 0.0
    need_c3 = 0.0
    counter = _BoxCounter(t)
    for fam in fams:
        fam = tuple(sorted(fam, key=len))
        for s in fam:
            if len(s) == 0:
                raise ValueError("index sets must be nonempty")
        sizes = tuple(len(s) for s in fam)
        e = counter.sum(fam)
        mu_bar = p
        for s in sizes:
            mu_bar *= s
        lam, case1, case2, ratio2 = _discrepancy_cases(e, mu_bar, n, sizes[-1], c2, c3)
        report.trials.append(DiscrepancyTrial(sizes, e, mu_bar, lam, case1, case2))
        if not (case1 or case2):
            report.violations += 1
        if not case2:
            need_c2 = max(need_c2, lam / math.e)
        if not case1:
            need_c3 = max(need_c3, ratio2)
    report.fitted_c2 = need_c2
    report.fitted_c3 = need_c3
    return report


@dataclass(frozen=True)
class DyadicProfile:
    """Dyadic magnitude classes and their edge-count statistics.

    Classes use half-open intervals [2^(s-1) d/sqrt(n), 2^s d/sqrt(n)) with
    s minimal at boundaries, for s = 1 .. ceil(log2(sqrt(n)/d)); only
    indices with y_{j,i} >= d/sqrt(n) (the positive-part branch) qualify.
    """

    delta: float
    smax: int
    classes: dict  # (mode j 1-based, s) -> int32 array of 1-based indices
    alpha: dict  # (j, s) -> |D_j^s| * 2^(2s) / n
    tuples: list  # DyadicTuple records over nonempty class combinations


@dataclass(frozen=True)
class DyadicTuple:
    levels: tuple
    sizes: tuple
    e: float
    mu_bar: float
    lam: float
    sigma: float


def dyadic_profile(ys, delta: float, t: SparseTensor, p: float) -> DyadicProfile:
    """Classify indices by dyadic magnitude and tabulate e, mu-bar, lambda,
    sigma over all nonempty class tuples."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    vecs = list(ys.vectors) if isinstance(ys, VectorTuple) else [np.asarray(v, float) for v in ys]
    k, n = t.shape.order, t.shape.dim
    if len(vecs) != k:
        raise ValueError(f"expected {k} vectors")
    base = delta / math.sqrt(n)
    smax = max(1, math.ceil(math.log2(math.sqrt(n) / delta)))
    classes = {}
    alpha = {}
    for j, v in enumerate(vecs, start=1):
        qual = np.flatnonzero(v >= base)
        if qual.size:
            s = np.floor(np.log2(v[qual] / base)).astype(np.int64) + 1
            s = np.clip(s, 1, smax)
        else:
            s = np.empty(0, dtype=np.int64)
        for level in range(1, smax + 1):
            members = (qual[s == level] + 1).astype(np.int32)
            if members.size:
                classes[(j, level)] = members
                alpha[(j, level)] = members.size * 2.0 ** (2 * level) / n
    tuples = []
    per_mode = [[lvl for (j, lvl) in classes if j == mode] for mode in range(1, k + 1)]
    for combo in itertools.product(*per_mode):
        fam = tuple(classes[(j + 1, combo[j])] for j in range(k))
        sizes = tuple(len(f) for f in fam)
        e = box_sum(t, fam)
        mu_bar = p
        for s_ in sizes:
            mu_bar *= s_
        lam = e / mu_bar if mu_bar > 0 else float("inf")
        sigma = lam * n ** (k / 2.0 - 1.0) * math.sqrt(n * p) * 2.0 ** (-sum(combo))
        tuples.append(DyadicTuple(tuple(combo), sizes, e, mu_bar, lam, sigma))
    return DyadicProfile(delta, smax, classes, alpha, tuples)


@dataclass(frozen=True)
class KLRecord:
    kl: float
    bound: float
    within: bool


def _model_table(model: ProbabilityModel) -> np.ndarray:
    if isinstance(model, Homogeneous):
        return np.asarray([model.p])
    if isinstance(model, DenseProbability):
        return model.table.reshape(-1)
    raise TypeError(f"unsupported probability model: {type(model).__name__}")


def kl_bernoulli(theta: ProbabilityModel, theta_prime: ProbabilityModel,
                 a: float, b: float) -> KLRecord:
    """Entrywise Bernoulli KL divergence against ||theta - theta'||_F^2 / (a(1-b)).

    Homogeneous models are treated as a single Bernoulli pair; a homogeneous
    model paired with a dense one broadcasts.  Terms with theta in {0, 1}
    use their one-sided limits; theta' in {0, 1} with theta != theta' gives
    +infinity.
    """
    if not 0.0 <= a < b <= 1.0:
        raise ValueError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    pt = _model_table(theta)
    qt = _model_table(theta_prime)
    if pt.size != qt.size:
        if pt.size == 1:
            pt = np.full_like(qt, pt[0])
        elif qt.size == 1:
            qt = np.full_like(pt, qt[0])
        else:
            raise ValueError("probability tables have incompatible shapes")
    lo = min(pt.min(), qt.min())
    hi = max(pt.max(), qt.max())
    if lo < a - 1e-15 or hi > b + 1e-15:
        raise ValueError(f"entries must lie in [{a}, {b}]")
    kl = 0.0
    for p_, q_ in zip(pt, qt):
        if p_ == q_:
            continue
        if q_ <= 0.0 or q_ >= 1.0:
            kl = float("inf")
            break
        if p_ > 0.0:
            kl += p_ * math.log(p_ / q_)
        if p_ < 1.0:
            kl += (1.0 - p_) * math.log((1.0 - p_) / (1.0 - q_))
    denom = a * (1.0 - b)
    diff = pt - qt
    fro_sq = float(np.dot(diff, diff))
    bound = fro_sq / denom if denom > 0 else float("inf")
    return KLRecord(float(kl), float(bound), bool(kl <= bound + 1e-12))
