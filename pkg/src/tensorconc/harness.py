"""Experiment harness: JSON-configured Monte-Carlo sweeps with deterministic
CSV output.

Each (n, trial) pair runs independently under seed (base_seed, trial); n
enters only through the coordinate space, never the seed.  Records are
buffered and written in (n, trial) order, so output bytes are identical
regardless of the worker count (the wall_ms column is the one field that
varies between runs and is masked by determinism comparisons).
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Homogeneous, OffsetTensor, SparseTensor, TensorShape, center
from .diagnostics import bounded_degree_check, discrepancy_check
from .hypergraph import SubsetFamilies, adjacency, mixing_check
from .regularization import degree_map, expander_construct, regularize, removed_count_check
from .rng import SeedSpec
from .sampling import bernoulli_sample, er_hypergraph, sparsify_uniform
from .spectral import PowerIterConfig, spectral_sandwich
from .unfolding import Partition

COMMANDS = ("concentration", "regularize", "expander", "sparsify", "diagnostics")
CSV_HEADER = [
    "command", "k", "n", "p", "m", "trial", "seed", "lower", "upper",
    "sqrt_nmp", "ratio_lower", "ratio_upper", "aux", "wall_ms",
]


class ConfigError(Exception):
    """Invalid experiment configuration (CLI exit code 2)."""


class CsvFormatError(Exception):
    """Malformed results CSV (CLI exit code 3)."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class PRule:
    """Sparsity rule p(n): c*log(n)/n^m, c/n^m, or a fixed constant."""

    kind: str
    c: float = 0.0
    m: int = 0
    p: float = 0.0

    def value(self, n: int) -> float:
        if self.kind == "c_logn_over_nm":
            return self.c * math.log(n) / n**self.m
        if self.kind == "c_over_nm":
            return self.c / n**self.m
        if self.kind == "fixed":
            return self.p
        raise ConfigError(f"unknown p_rule kind {self.kind!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "PRule":
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError(f"p_rule must be an object with a 'kind', got {d!r}")
        kind = d["kind"]
        if kind == "fixed":
            if "p" not in d:
                raise ConfigError("fixed p_rule needs 'p'")
            return cls(kind="fixed", p=float(d["p"]))
        if kind in ("c_logn_over_nm", "c_over_nm"):
            if "c" not in d or "m" not in d:
                raise ConfigError(f"{kind} p_rule needs 'c' and 'm'")
            return cls(kind=kind, c=float(d["c"]), m=int(d["m"]))
        raise ConfigError(f"unknown p_rule kind {kind!r}")


@dataclass(frozen=True)
class EstimatorSettings:
    restarts: int = 16
    matrix_tol: float = 1e-10
    tensor_tol: float = 1e-8
    max_iterations: int = 500
    num_slices: int = 4

    def power_config(self, seed: SeedSpec) -> PowerIterConfig:
        return PowerIterConfig(
            matrix_tol=self.matrix_tol,
            tensor_tol=self.tensor_tol,
            max_iterations=self.max_iterations,
            restarts=self.restarts,
            seed=seed,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    k: int
    n_list: tuple
    p_rule: PRule
    m: int
    trials: int
    base_seed: int
    estimator: EstimatorSettings = EstimatorSettings()
    out: str = "results.csv"
    partition: object = None  # optional Partition override for the upper bound
    params: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if self.k < 2:
            raise ConfigError(f"k must be >= 2, got {self.k}")
        if not self.n_list or list(self.n_list) != sorted(set(self.n_list)):
            raise ConfigError("n_list must be nonempty, ascending, duplicate-free")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 1 <= self.m <= self.k - 1:
            raise ConfigError(f"m must be in [1, {self.k - 1}], got {self.m}")
        for n in self.n_list:
            p = self.p_rule.value(int(n))
            if not 0.0 < p <= 1.0:
                raise ConfigError(f"p_rule gives p={p} outside (0, 1] at n={n}")
        if self.command == "expander" and self.m != self.k - 1:
            raise ConfigError("expander runs use m = k - 1")
        if self.partition is not None:
            if self.partition.order != self.k:
                raise ConfigError(
                    f"partition covers [{self.partition.order}] but k = {self.k}")
            if self.partition.arity != 2:
                raise ConfigError("partition override must have exactly two blocks")


def config_from_dict(data: dict, command: str | None = None) -> ExperimentConfig:
    data = dict(data)
    cmd = data.pop("command", None)
    if command is not None:
        if cmd is not None and cmd != command:
            raise ConfigError(f"config command {cmd!r} conflicts with CLI command {command!r}")
        cmd = command
    if cmd is None:
        raise ConfigError("no command given")
    try:
        est = EstimatorSettings(**data.pop("estimator", {}))
    except TypeError as exc:
        raise ConfigError(f"bad estimator settings: {exc}") from exc
    part = data.pop("partition", None)
    if part is not None:
        try:
            part = Partition.from_json_blocks(part)
        except ValueError as exc:
            raise ConfigError(f"bad partition: {exc}") from exc
    try:
        cfg = ExperimentConfig(
            command=cmd,
            k=int(data.pop("k")),
            n_list=tuple(int(n) for n in data.pop("n_list")),
            p_rule=PRule.from_dict(data.pop("p_rule")),
            m=int(data.pop("m")),
            trials=int(data.pop("trials")),
            base_seed=int(data.pop("base_seed", 0)),
            estimator=est,
            out=str(data.pop("out", "results.csv")),
            partition=part,
            params=dict(data.pop("params", {})),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc.args[0]}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if data:
        raise ConfigError(f"unknown config keys: {sorted(data)}")
    cfg.validate()
    return cfg


def load_config(path: str, command: str | None = None, overrides: list | None = None) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set path {key!r} crosses a non-object")
        node[parts[-1]] = value
    return config_from_dict(data, command)


@dataclass
class ResultRecord:
    command: str
    k: int
    n: int
    p: float
    m: int
    trial: int
    seed: str
    lower: float
    upper: float
    sqrt_nmp: float
    ratio_lower: float
    ratio_upper: float
    aux: dict
    wall_ms: float

    def csv_row(self) -> list:
        return [
            self.command, str(self.k), str(self.n), _fmt(self.p), str(self.m),
            str(self.trial), self.seed, _fmt(self.lower), _fmt(self.upper),
            _fmt(self.sqrt_nmp), _fmt(self.ratio_lower), _fmt(self.ratio_upper),
            json.dumps(self.aux, sort_keys=True, separators=(",", ":")),
            _fmt(self.wall_ms),
        ]


def _sandwich_aux(est) -> dict:
    aux = {
        "hopm": est.hopm_value,
        "upper_capped": est.upper_capped,
        "lower_converged": est.lower_converged,
        "upper_converged": est.upper_converged,
    }
    if est.slice_value is not None:
        aux["slice"] = est.slice_value
    if est.chain_upper is not None:
        aux["chain_upper"] = est.chain_upper
    return aux


def _estimate(cfg: ExperimentConfig, w: OffsetTensor, seed: SeedSpec):
    pconf = cfg.estimator.power_config(seed)
    est = spectral_sandwich(w, cfg.m, pconf, num_slices=cfg.estimator.num_slices)
    extra = None
    if cfg.partition is not None and cfg.partition != est.upper_partition:
        from .spectral import matrix_op_norm
        from .unfolding import unfold

        extra = matrix_op_norm(unfold(w, cfg.partition), pconf).value
    return est, extra


def _run_trial(cfg: ExperimentConfig, n: int, trial: int) -> ResultRecord:
    start = time.perf_counter()
    seed = SeedSpec(cfg.base_seed, trial)
    p = cfg.p_rule.value(n)
    shape = TensorShape(cfg.k, n)
    aux: dict = {}
    lower = upper = 0.0
    partition_upper = None
    if cfg.command == "concentration":
        t = bernoulli_sample(shape, Homogeneous(p), seed)
        w = center(t, Homogeneous(p))
        est, partition_upper = _estimate(cfg, w, seed)
        lower, upper = est.lower, est.upper
        aux = {"nnz": t.nnz, **_sandwich_aux(est)}
    elif cfg.command == "regularize":
        t = bernoulli_sample(shape, Homogeneous(p), seed)
        reg = regularize(t, cfg.m, p)
        w = center(reg.regularized, Homogeneous(p))
        est, partition_upper = _estimate(cfg, w, seed)
        lower, upper = est.lower, est.upper
        aux = {
            "nnz": t.nnz,
            "removed": reg.removed_count,
            "threshold": reg.threshold,
            **_sandwich_aux(est),
        }
        if reg.in_guarantee_regime:
            chk = removed_count_check(reg, n, p)
            aux["removed_bound"] = chk.bound
            aux["removed_within"] = chk.within
        post = degree_map(reg.regularized, cfg.m)
        aux["max_prefix_degree"] = post.max_degree
    elif cfg.command == "expander":
        h = er_hypergraph(cfg.k, n, p, seed)
        tprime = expander_construct(adjacency(h), p)
        w = center(tprime, Homogeneous(p))
        est, partition_upper = _estimate(cfg, w, seed)
        lower, upper = est.lower, est.upper
        dmax = degree_map(tprime, cfg.k - 1).max_degree if tprime.nnz else 0
        fam = SubsetFamilies.sampled(int(cfg.params.get("mixing_families", 500)))
        report = mixing_check(tprime, p, fam, seed) if 0 < p < 1 else None
        aux = {
            "edges": h.num_edges,
            "max_first_mode_degree": dmax,
            "degree_bound": 2.0 * math.factorial(cfg.k) * n ** (cfg.k - 1) * p,
            **_sandwich_aux(est),
        }
        if report is not None:
            aux["mixing_max_ratio"] = report.max_ratio
            aux["fitted_C"] = report.fitted_c
    elif cfg.command == "sparsify":
        base = SparseTensor.all_ones(shape)
        kept = sparsify_uniform(base, p, seed)
        keep_lin = kept.linear_indices()
        mask = np.zeros(shape.ncoords, dtype=bool)
        mask[keep_lin.astype(np.int64)] = True
        values = np.where(mask, base.values * (1.0 - p), base.values * (-p))
        w = OffsetTensor(SparseTensor(shape, base.coords, values, presorted=True), 0.0)
        est, partition_upper = _estimate(cfg, w, seed)
        lower, upper = est.lower, est.upper
        aux = {"kept": kept.nnz, "total": base.nnz, **_sandwich_aux(est)}
    elif cfg.command == "diagnostics":
        t = bernoulli_sample(shape, Homogeneous(p), seed)
        c1 = float(cfg.params.get("c1", 3.0))
        c2 = float(cfg.params.get("c2", 20.0))
        c3 = float(cfg.params.get("c3", 20.0))
        nfam = int(cfg.params.get("families", 1000))
        bd = bounded_degree_check(t, p, c1)
        disc = discrepancy_check(t, p, c2, c3, nfam, seed)
        aux = {
            "nnz": t.nnz,
            "max_degree": bd.max_degree,
            "degree_bound": bd.bound,
            "degree_within": bd.within,
            "disc_violations": disc.violations,
            "fitted_c2": disc.fitted_c2,
            "fitted_c3": disc.fitted_c3,
        }
    else:  # pragma: no cover - guarded by validate()
        raise ConfigError(f"unknown command {cfg.command!r}")
    if partition_upper is not None:
        aux["partition_upper"] = partition_upper
    sqrt_nmp = math.sqrt(n**cfg.m * p)
    wall_ms = (time.perf_counter() - start) * 1000.0
    return ResultRecord(
        command=cfg.command, k=cfg.k, n=n, p=p, m=cfg.m, trial=trial,
        seed=f"{cfg.base_seed}:{trial}",
        lower=lower, upper=upper, sqrt_nmp=sqrt_nmp,
        ratio_lower=lower / sqrt_nmp if sqrt_nmp > 0 else 0.0,
        ratio_upper=upper / sqrt_nmp if sqrt_nmp > 0 else 0.0,
        aux=aux, wall_ms=wall_ms,
    )


def run(cfg: ExperimentConfig, jobs: int = 1, out: str | None = None) -> list:
    """Execute every (n, trial) cell, write the CSV and a JSON summary.

    Output is a pure function of the config: trials may execute on up to
    ``jobs`` workers, but records are emitted in (n, trial) order.
    """
    cfg.validate()
    tasks = [(n, trial) for n in cfg.n_list for trial in range(cfg.trials)]
    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda nt: _run_trial(cfg, *nt), tasks))
    else:
        records = [_run_trial(cfg, n, trial) for n, trial in tasks]
    records.sort(key=lambda r: (r.n, r.trial))
    path = out or cfg.out
    with open(path, "w", encoding="ascii", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.csv_row())
    summary = summarize(path)
    with open(path + ".summary.json", "w", encoding="ascii") as f:
        json.dump(summary, f, sort_keys=True, indent=2)
        f.write("\n")
    return records


def summarize(csv_path: str) -> dict:
    """Deterministic aggregation of a results CSV: per-n medians/maxima of the
    ratio columns, fitted constants, and sandwich-violation counts."""
    try:
        with open(csv_path, "r", encoding="ascii", newline="") as f:
            reader = csv.reader(f)
            rows = list(reader)
    except OSError as exc:
        raise CsvFormatError(f"cannot read {csv_path}: {exc}") from exc
    if not rows:
        raise CsvFormatError(f"{csv_path} has no header row")
    if rows[0] != CSV_HEADER:
        raise CsvFormatError(f"{csv_path} header mismatch: {rows[0]}")
    body = rows[1:]
    per_n: dict = {}
    violations = 0
    max_ratio_upper = 0.0
    min_ratio_lower = float("inf")
    for row in body:
        if len(row) != len(CSV_HEADER):
            raise CsvFormatError(f"row has {len(row)} fields, expected {len(CSV_HEADER)}")
        try:
            n = int(row[2])
            lower, upper = float(row[7]), float(row[8])
            ratio_lower, ratio_upper = float(row[10]), float(row[11])
        except ValueError as exc:
            raise CsvFormatError(f"unparsable row {row!r}: {exc}") from exc
        if lower > upper + 1e-8:
            violations += 1
        bucket = per_n.setdefault(n, {"ratio_lower": [], "ratio_upper": []})
        bucket["ratio_lower"].append(ratio_lower)
        bucket["ratio_upper"].append(ratio_upper)
        max_ratio_upper = max(max_ratio_upper, ratio_upper)
        min_ratio_lower = min(min_ratio_lower, ratio_lower)
    out = {"rows": len(body), "violations": violations, "per_n": {}}
    for n in sorted(per_n):
        rl, ru = per_n[n]["ratio_lower"], per_n[n]["ratio_upper"]
        out["per_n"][str(n)] = {
            "count": len(rl),
            "median_ratio_lower": statistics.median(rl),
            "max_ratio_lower": max(rl),
            "median_ratio_upper": statistics.median(ru),
            "max_ratio_upper": max(ru),
        }
    if body:
        out["fitted"] = {
            "max_ratio_upper": max_ratio_upper,
            "min_ratio_lower": min_ratio_lower,
        }
    return out
