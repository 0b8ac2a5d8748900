"""Sweep harness: datasets of increasing size, several planners, sub-optimality gaps."""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .baselines import LcbConfig, lcb_penalty
from .data import (behavior_partial, behavior_uniform, estimate_model, random_action,
                   sample_dataset)
from .garnet import generate_garnet
from .mdp import (TabularMdp, exact_value_iteration, load_mdp, policy_evaluation, scalar_value,
                  value_iteration_arrays)
from .robust import (BERNSTEIN, HOEFFDING, EmpiricalRobustModel, RadiusStyle,
                     robust_value_iteration, robust_value_iteration_bernstein)

METHODS = ("dro_hoeffding", "dro_bernstein", "lcb", "nonrobust")
COVERAGES = ("uniform", "partial")
RAW_HEADER = ["method", "N", "seed", "gap", "runtime_ms", "iterations"]
AGG_HEADER = ["method", "N", "mean", "p5", "p95"]


class ExperimentError(RuntimeError):
    pass


def suboptimality_gap(mdp: TabularMdp, policy, tol: float = 1e-8, v_star=None) -> float:
    """``V*(rho) - V^pi(rho)`` on the true MDP.

    ``v_star`` may be passed to skip the optimal solve; otherwise it is
    computed by value iteration at ``tol / 10``.
    """
    if v_star is None:
        v_star, _ = exact_value_iteration(mdp, tol / 10.0)
    return scalar_value(v_star, mdp.rho) - scalar_value(policy_evaluation(mdp, policy), mdp.rho)


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a sweep.

    ``mdp_source`` is ``{"garnet": {"states": S, "actions": A, "seed": k}}``
    or ``{"file": "path/to/mdp.json"}``. ``seeds`` are replicate indices;
    the dataset seed of each cell is derived from ``(base_seed, N, seed)``.
    ``gamma=None`` keeps the discount stored in an MDP file (0.95 for Garnet).
    """

    mdp_source: dict
    sizes: list
    seeds: list
    methods: list = field(default_factory=lambda: list(METHODS))
    coverage: str = "uniform"
    delta: float = 0.1
    gamma: float | None = None
    tol: float = 1e-6
    base_seed: int = 0
    lcb_scale: float = 1.0
    record_runtime: bool = False
    output: str | None = None

    def __post_init__(self):
        if not self.sizes or not self.seeds or not self.methods:
            raise ValueError("sizes, seeds and methods must be nonempty")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly increasing")
        if any(int(n) != n or n < 1 for n in self.sizes):
            raise ValueError("sizes must be positive integers")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if self.coverage not in COVERAGES:
            raise ValueError(f"coverage must be one of {COVERAGES}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not ("garnet" in self.mdp_source or "file" in self.mdp_source):
            raise ValueError("mdp_source needs a 'garnet' or 'file' entry")
        RadiusStyle(HOEFFDING, self.delta)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_mdp(cfg: ExperimentConfig) -> TabularMdp:
    src = cfg.mdp_source
    if "garnet" in src:
        g = src["garnet"]
        gamma = 0.95 if cfg.gamma is None else cfg.gamma
        return generate_garnet(int(g["states"]), int(g["actions"]), int(g.get("seed", 0)), gamma=gamma)
    mdp = load_mdp(src["file"])
    if cfg.gamma is not None and cfg.gamma != mdp.gamma:
        mdp = TabularMdp(mdp.kernel, mdp.reward, cfg.gamma, mdp.rho)
    return mdp


def dataset_seed(base_seed: int, n: int, seed_index: int) -> int:
    return int(np.random.SeedSequence([base_seed, n, seed_index]).generate_state(1)[0])


class Row(NamedTuple):
    method: str
    N: int
    seed: int
    gap: float
    runtime_ms: float | None
    iterations: int


class Aggregate(NamedTuple):
    method: str
    N: int
    mean: float
    p5: float
    p95: float


@dataclass
class ExperimentResult:
    rows: list
    eta: int | None = None

    @property
    def aggregates(self) -> list:
        return aggregate(self.rows)

    def gaps(self, method: str, n: int) -> np.ndarray:
        return np.array([r.gap for r in self.rows if r.method == method and r.N == n])

    def mean_gap(self, method: str, n: int) -> float:
        for agg in self.aggregates:
            if agg.method == method and agg.N == n:
                return agg.mean
        raise KeyError((method, n))


def aggregate(rows) -> list:
    """Mean and linearly interpolated 5th/95th percentiles per ``(method, N)``."""
    groups: dict = {}
    for r in sorted(rows, key=lambda r: (r.method, r.N, r.seed)):
        groups.setdefault((r.method, r.N), []).append(r.gap)
    out = []
    for (method, n), gaps in groups.items():
        g = np.asarray(gaps)
        p5, p95 = np.percentile(g, [5, 95], method="linear")
        out.append(Aggregate(method, n, float(g.mean()), float(p5), float(p95)))
    return out


def _solve(method, model, data, cfg, gamma):
    if method == "dro_hoeffding":
        rm = EmpiricalRobustModel.build(model, RadiusStyle(HOEFFDING, cfg.delta), gamma)
        sol = robust_value_iteration(rm, cfg.tol)
        return sol.policy, sol.iterations
    if method == "dro_bernstein":
        rm = EmpiricalRobustModel.build(model, RadiusStyle(BERNSTEIN, cfg.delta), gamma)
        sol = robust_value_iteration_bernstein(rm, data, cfg.tol)
        return sol.policy, sol.iterations
    reward = model.reward
    if method == "lcb":
        penalty = lcb_penalty(model.counts, LcbConfig(cfg.delta, cfg.lcb_scale), gamma)
        reward = np.maximum(0.0, reward - penalty)
    _, pi, iters, _ = value_iteration_arrays(model.kernel, reward, gamma, cfg.tol)
    return pi, iters


def run_cell(cfg: ExperimentConfig, mdp: TabularMdp, mu, v_star, n: int, seed_index: int) -> list:
    """All methods on one shared dataset for ``(n, seed_index)``."""
    data = sample_dataset(mdp, mu, n, dataset_seed(cfg.base_seed, n, seed_index))
    model = estimate_model(data)
    rows = []
    for method in sorted(cfg.methods):
        start = time.perf_counter()
        try:
            policy, iters = _solve(method, model, data, cfg, mdp.gamma)
        except Exception as exc:
            raise ExperimentError(f"method={method} N={n} seed={seed_index}: {exc}") from exc
        elapsed = (time.perf_counter() - start) * 1e3 if cfg.record_runtime else None
        gap = suboptimality_gap(mdp, policy, v_star=v_star)
        rows.append(Row(method, n, seed_index, gap, elapsed, iters))
    return rows


def _cell_job(args):
    return run_cell(*args)


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    mdp = build_mdp(cfg)
    v_star, pi_star = exact_value_iteration(mdp, cfg.tol / 10.0)
    eta = None
    if cfg.coverage == "uniform":
        mu = behavior_uniform(mdp.num_states, mdp.num_actions)
    else:
        eta = random_action(mdp.num_actions, cfg.base_seed)
        mu = behavior_partial(pi_star, mdp.num_actions, eta)
    cells = [(cfg, mdp, mu, v_star, n, k) for n in cfg.sizes for k in cfg.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_cell_job, cells))
    else:
        chunks = [_cell_job(c) for c in cells]
    rows = sorted((r for chunk in chunks for r in chunk), key=lambda r: (r.method, r.N, r.seed))
    return ExperimentResult(rows, eta=eta)


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def emit_tables(res: ExperimentResult, out_dir) -> tuple:
    """Write ``raw.csv`` and ``agg.csv`` into ``out_dir``; returns both paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        raw_path, agg_path = out_dir / "raw.csv", out_dir / "agg.csv"
        rows = sorted(res.rows, key=lambda r: (r.method, r.N, r.seed))
        with open(raw_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RAW_HEADER)
            for r in rows:
                w.writerow([r.method, r.N, r.seed, _fmt(r.gap), _fmt(r.runtime_ms), r.iterations])
        with open(agg_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(AGG_HEADER)
            for a in aggregate(rows):
                w.writerow([a.method, a.N, _fmt(a.mean), _fmt(a.p5), _fmt(a.p95)])
    except OSError as exc:
        raise OSError(f"could not write tables to {out_dir}: {exc}") from exc
    return raw_path, agg_path


def read_tables(out_dir):
    """Parse ``raw.csv`` and ``agg.csv`` back into rows and aggregates."""
    out_dir = Path(out_dir)
    with open(out_dir / "raw.csv", encoding="utf-8", newline="") as fh:
        rows = [Row(d["method"], int(d["N"]), int(d["seed"]), float(d["gap"]),
                    float(d["runtime_ms"]) if d["runtime_ms"] else None, int(d["iterations"]))
                for d in csv.DictReader(fh)]
    with open(out_dir / "agg.csv", encoding="utf-8", newline="") as fh:
        aggs = [Aggregate(d["method"], int(d["N"]), float(d["mean"]), float(d["p5"]), float(d["p95"]))
                for d in csv.DictReader(fh)]
    return rows, aggs
