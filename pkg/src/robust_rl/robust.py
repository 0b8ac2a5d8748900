"""L1 uncertainty sets around the empirical kernel and robust value iteration.

The worst-case expectation over ``{q in simplex : ||q - p_hat||_1 <= R}`` is
computed exactly by a sort-and-transfer rule: up to ``R/2`` of probability
mass is taken from the highest-value states and put on the lowest-value one.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from .data import EmpiricalModel, OfflineDataset
from .mdp import stopping_threshold

log = logging.getLogger(__name__)

HOEFFDING = "hoeffding"
BERNSTEIN = "bernstein"
TIE_TOL = 1e-9
TIE_FAIL_TOL = 1e-6
ORACLE_MAX_STATES = 12


class TieBreakError(RuntimeError):
    """No sampled action attains the backup maximum at a sampled state."""


@dataclass(frozen=True)
class RadiusStyle:
    tag: str
    delta: float = 0.1

    def __post_init__(self):
        if self.tag not in (HOEFFDING, BERNSTEIN):
            raise ValueError(f"unknown radius style {self.tag!r}")
        if not 1e-6 <= self.delta <= 0.5:
            raise ValueError(f"delta must be in [1e-6, 0.5], got {self.delta}")


def radius_table(counts, style: RadiusStyle, n_total: int | None = None) -> np.ndarray:
    """Per-pair L1 radii, clamped to 2.

    Hoeffding: ``sqrt(log(SA/delta) / (2 N(s,a)))``.
    Bernstein: ``log(N/delta) / N(s,a)`` with ``N`` the dataset size.
    Unvisited pairs get radius 2, i.e. the whole simplex.
    """
    counts = np.asarray(counts)
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    S, A = counts.shape
    n_total = int(counts.sum()) if n_total is None else int(n_total)
    visited = counts > 0
    radius = np.full(counts.shape, 2.0)
    nsa = counts[visited].astype(float)
    if style.tag == HOEFFDING:
        raw = np.sqrt(math.log(S * A / style.delta) / (2.0 * nsa))
    else:
        if n_total < 1:
            raise ValueError("Bernstein radius needs at least one sample")
        raw = math.log(n_total / style.delta) / nsa
    radius[visited] = np.minimum(2.0, raw)
    return radius


def _check_simplex(p_hat: np.ndarray) -> None:
    if np.any(p_hat < 0) or abs(p_hat.sum() - 1.0) > 1e-9:
        raise ValueError("p_hat must be a probability vector")


def _check_radius(radius: float) -> None:
    if not radius >= 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")


def _sigma_batch(p_hat: np.ndarray, radius: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorised support function over the leading axes of ``p_hat``.

    ``p_hat`` has shape ``(..., S)``, ``radius`` shape ``(...)``.
    """
    order = np.argsort(v, kind="stable")
    vs = v[order]
    ps = p_hat[..., order]
    excess = vs - vs[0]
    budget = np.minimum(radius / 2.0, 1.0 - ps[..., 0])
    # mass sitting strictly above position j in the sorted order
    above = np.cumsum(ps[..., ::-1], axis=-1)[..., ::-1] - ps
    removed = np.clip(budget[..., None] - above, 0.0, ps)
    removed[..., 0] = 0.0
    kept = ps - removed
    sigma = vs[0] + np.sum(kept[..., 1:] * excess[1:], axis=-1)
    return np.where(radius / 2.0 >= 1.0 - ps[..., 0], vs[0], sigma)


def support_function(p_hat, radius: float, v) -> float:
    """Exact ``min q @ v`` over the L1 ball of ``radius`` around ``p_hat`` in the simplex.

    Ties in ``v`` are broken by state index; cost is one sort, ``O(S log S)``.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_simplex(p_hat)
    _check_radius(radius)
    return float(_sigma_batch(p_hat, np.asarray(float(radius)), v))


def support_function_dual(p_hat, radius: float, v, span_weight: float = 1.0) -> float:
    """Dual form ``max_{0 <= m <= v} p_hat @ (v - m) - span_weight * radius * Span(v - m)``.

    With the default ``span_weight=1`` the span term carries the full radius
    and the result equals the primal at radius ``min(2R, 2)``.
    ``span_weight=0.5`` recovers the primal at radius ``R``. The inner
    maximiser is ``v - m = min(v, theta)`` with ``theta`` one of the values of
    ``v``, so a scan over the sorted values is exact.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_simplex(p_hat)
    _check_radius(radius)
    if np.any(v < 0):
        raise ValueError("the dual form requires a nonnegative value vector")
    thetas = np.unique(v)
    w = np.minimum(v[None, :], thetas[:, None])
    span = w.max(axis=1) - w.min(axis=1)
    objective = w @ p_hat - span_weight * radius * span
    return float(objective.max())


def _lp_support(p_hat, radius, v):
    S = len(v)
    # absorb rounding in p_hat so the radius-0 case stays feasible
    p_hat = p_hat / p_hat.sum()
    # variables (q, u) with u >= |q - p_hat|
    c = np.concatenate([v, np.zeros(S)])
    eye = np.eye(S)
    a_ub = np.block([[eye, -eye], [-eye, -eye], [np.zeros((1, S)), np.ones((1, S))]])
    b_ub = np.concatenate([p_hat, -p_hat, [radius]])
    a_eq = np.concatenate([np.ones(S), np.zeros(S)])[None, :]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (2 * S), method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"LP oracle failed: {res.message}")
    return float(res.fun)


def _vertex_support(p_hat, radius, v):
    """Enumerate every basic solution of the lifted polytope and take the best."""
    S = len(v)
    eye = np.eye(S)
    zero = np.zeros((S, S))
    # rows: q >= 0, u >= 0, u - q >= -p_hat, u + q >= p_hat, -sum u >= -radius
    g = np.vstack([np.hstack([eye, zero]), np.hstack([zero, eye]),
                   np.hstack([-eye, eye]), np.hstack([eye, eye]),
                   np.concatenate([np.zeros(S), -np.ones(S)])[None, :]])
    h = np.concatenate([np.zeros(2 * S), -p_hat, p_hat, [-radius]])
    eq = np.concatenate([np.ones(S), np.zeros(S)])
    best = math.inf
    for rows in itertools.combinations(range(len(g)), 2 * S - 1):
        m = np.vstack([g[list(rows)], eq])
        if abs(np.linalg.det(m)) < 1e-12:
            continue
        x = np.linalg.solve(m, np.concatenate([h[list(rows)], [1.0]]))
        if np.all(g @ x >= h - 1e-12):
            best = min(best, float(v @ x[:S]))
    return best


def support_function_lp_oracle(p_hat, radius: float, v, method: str = "lp") -> float:
    """Reference value of the support function for small test problems.

    ``method="lp"`` solves the lifted linear program with HiGHS dual simplex;
    ``method="vertex"`` enumerates basic feasible solutions (only sensible
    for ``S <= 3``).
    """
    p_hat = np.asarray(p_hat, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_simplex(p_hat)
    _check_radius(radius)
    if len(v) > ORACLE_MAX_STATES:
        raise ValueError(f"oracle limited to S <= {ORACLE_MAX_STATES}")
    if method == "lp":
        return _lp_support(p_hat, float(radius), v)
    if method == "vertex":
        if len(v) > 4:
            raise ValueError("vertex enumeration limited to S <= 4")
        return _vertex_support(p_hat, float(radius), v)
    raise ValueError(f"unknown oracle method {method!r}")


@dataclass(frozen=True, eq=False)
class EmpiricalRobustModel:
    """Empirical MDP plus a per-pair L1 radius; the uncertainty set is their product."""

    base: EmpiricalModel
    radius: np.ndarray
    style: RadiusStyle | None
    gamma: float

    def __post_init__(self):
        radius = np.array(self.radius, dtype=float)
        if radius.shape != self.base.reward.shape:
            raise ValueError("radius table shape does not match the model")
        if np.any(radius < 0) or np.any(radius > 2):
            raise ValueError("radii must lie in [0, 2]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        radius.setflags(write=False)
        object.__setattr__(self, "radius", radius)

    @property
    def num_states(self) -> int:
        return self.base.num_states

    @property
    def num_actions(self) -> int:
        return self.base.num_actions

    @classmethod
    def build(cls, base: EmpiricalModel, style: RadiusStyle, gamma: float):
        return cls(base, radius_table(base.counts, style), style, gamma)


def robust_q(model: EmpiricalRobustModel, v) -> np.ndarray:
    """``r_hat(s,a) + gamma * sigma(s, a; v)`` for every pair."""
    v = np.asarray(v, dtype=float)
    return model.base.reward + model.gamma * _sigma_batch(model.base.kernel, model.radius, v)


def robust_bellman_apply(model: EmpiricalRobustModel, v):
    """One synchronous robust backup. Returns ``(new_v, greedy_policy)``."""
    q = robust_q(model, v)
    return q.max(axis=1), np.argmax(q, axis=1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class RobustSolution:
    value: np.ndarray
    policy: np.ndarray
    iterations: int
    residual: float
    style: str = ""
    delta: float | None = None

    def to_dict(self) -> dict:
        return {"value": self.value.tolist(), "policy": self.policy.tolist(),
                "iterations": self.iterations, "residual": self.residual,
                "style": self.style, "delta": self.delta}

    @classmethod
    def from_dict(cls, d: dict) -> "RobustSolution":
        return cls(np.asarray(d["value"], dtype=float), np.asarray(d["policy"], dtype=np.int64),
                   int(d["iterations"]), float(d["residual"]), d.get("style", ""), d.get("delta"))


def save_solution(sol: RobustSolution, path) -> None:
    Path(path).write_text(json.dumps(sol.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_solution(path) -> RobustSolution:
    return RobustSolution.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _iterate(model: EmpiricalRobustModel, tol: float, v0=None, max_iter=100_000):
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = np.zeros(model.num_states) if v0 is None else np.array(v0, dtype=float)
    threshold = stopping_threshold(tol, model.gamma)
    for it in range(1, max_iter + 1):
        new = robust_q(model, v).max(axis=1)
        gap = float(np.max(np.abs(new - v)))
        v = new
        if gap <= threshold:
            break
    # sup-norm distance to the fixed point, bounded via the contraction
    residual = 0.0 if model.gamma == 0 else gap * model.gamma / (1.0 - model.gamma)
    return v, it, residual


def _tag(model):
    if model.style is None:
        return "", None
    return model.style.tag, model.style.delta


def robust_value_iteration(model: EmpiricalRobustModel, tol: float = 1e-8, v0=None) -> RobustSolution:
    """Robust value iteration with Jacobi sweeps from ``v0`` (zeros by default)."""
    v, it, residual = _iterate(model, tol, v0)
    policy = np.argmax(robust_q(model, v), axis=1).astype(np.int64)
    return RobustSolution(v, policy, it, residual, *_tag(model))


def restricted_greedy(q: np.ndarray, counts_sa: np.ndarray) -> np.ndarray:
    """Greedy policy that prefers actions seen in the data at visited states.

    At a state with samples, the chosen action is the lowest-index sampled
    action within ``TIE_TOL`` of the maximum. If none is that close, the best
    sampled action is taken provided it is within ``TIE_FAIL_TOL``; otherwise
    ``TieBreakError`` is raised. Unvisited states use the plain argmax.
    """
    S, _ = q.shape
    policy = np.argmax(q, axis=1).astype(np.int64)
    sampled = counts_sa > 0
    for s in np.flatnonzero(sampled.any(axis=1)):
        best = q[s].max()
        near = np.flatnonzero(sampled[s] & (q[s] >= best - TIE_TOL))
        if len(near):
            policy[s] = near[0]
            continue
        cand = np.flatnonzero(sampled[s])
        a = cand[np.argmax(q[s, cand])]
        if q[s, a] < best - TIE_FAIL_TOL:
            raise TieBreakError(
                f"state {s}: best sampled action {a} is {best - q[s, a]:.3e} below the maximum")
        log.warning("state %d: sampled action within %.1e of max only after widening", s, best - q[s, a])
        policy[s] = a
    return policy


def robust_value_iteration_bernstein(model: EmpiricalRobustModel, data: OfflineDataset | None = None,
                                     tol: float = 1e-8, v0=None) -> RobustSolution:
    """Robust value iteration whose output policy only uses sampled actions where possible.

    Counts come from ``data`` when given, else from the model itself.
    """
    counts = model.base.counts if data is None else data.counts_sa
    v, it, residual = _iterate(model, tol, v0)
    policy = restricted_greedy(robust_q(model, v), counts)
    return RobustSolution(v, policy, it, residual, *_tag(model))


def hoeffding_coverage(kernel, samples_per_pair: int, delta: float, trials: int, seed: int = 0) -> float:
    """Monte Carlo frequency with which every true row lies in its Hoeffding ball.

    Each trial draws ``samples_per_pair`` next states for every pair, forms
    the empirical rows and checks ``||P_hat - P||_1 <= R`` simultaneously.
    """
    kernel = np.asarray(kernel, dtype=float)
    S, A, _ = kernel.shape
    counts = np.full((S, A), samples_per_pair)
    radius = radius_table(counts, RadiusStyle(HOEFFDING, delta))
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(trials):
        draws = rng.multinomial(samples_per_pair, kernel.reshape(S * A, S)).reshape(S, A, S)
        err = np.abs(draws / samples_per_pair - kernel).sum(axis=2)
        hits += bool(np.all(err <= radius))
    return hits / trials
