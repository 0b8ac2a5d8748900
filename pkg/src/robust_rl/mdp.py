"""Tabular MDPs: representation, exact planning, evaluation and occupancy.

Shapes follow one convention everywhere in the package:
``kernel[s, a, s']``, ``reward[s, a]``, ``rho[s]``, value vectors ``v[s]``
and deterministic policies as integer arrays ``policy[s]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ROW_TOL = 1e-12


class MdpValidationError(ValueError):
    """Raised when arrays do not describe a valid tabular MDP."""


def _check_distribution(p: np.ndarray, name: str, tol: float = ROW_TOL) -> None:
    if np.any(~np.isfinite(p)):
        raise MdpValidationError(f"{name} contains non-finite entries")
    if np.any(p < 0):
        raise MdpValidationError(f"{name} has negative entries")
    sums = p.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > tol):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise MdpValidationError(f"{name} does not sum to 1 (max deviation {worst:.3e})")


def _frozen(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """Finite discounted MDP with deterministic rewards in [0, 1].

    Arrays are copied and made read-only on construction.
    """

    kernel: np.ndarray
    reward: np.ndarray
    gamma: float
    rho: np.ndarray

    def __post_init__(self):
        kernel = _frozen(self.kernel)
        reward = _frozen(self.reward)
        rho = _frozen(self.rho)
        if kernel.ndim != 3 or kernel.shape[0] != kernel.shape[2]:
            raise MdpValidationError(f"kernel must have shape (S, A, S), got {kernel.shape}")
        S, A, _ = kernel.shape
        if S < 1 or A < 1:
            raise MdpValidationError("need at least one state and one action")
        if reward.shape != (S, A):
            raise MdpValidationError(f"reward must have shape {(S, A)}, got {reward.shape}")
        if rho.shape != (S,):
            raise MdpValidationError(f"rho must have shape {(S,)}, got {rho.shape}")
        _check_distribution(kernel, "kernel rows")
        _check_distribution(rho, "rho")
        if np.any(~np.isfinite(reward)) or reward.min() < 0 or reward.max() > 1:
            raise MdpValidationError("rewards must lie in [0, 1]")
        gamma = float(self.gamma)
        if not 0.0 <= gamma < 1.0:
            raise MdpValidationError(f"gamma must be in [0, 1), got {gamma}")
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "reward", reward)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "gamma", gamma)

    @property
    def num_states(self) -> int:
        return self.kernel.shape[0]

    @property
    def num_actions(self) -> int:
        return self.kernel.shape[1]

    def to_dict(self) -> dict:
        return {
            "S": self.num_states,
            "A": self.num_actions,
            "gamma": self.gamma,
            "rho": self.rho.tolist(),
            "r": self.reward.tolist(),
            "P": self.kernel.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TabularMdp":
        try:
            S, A = int(d["S"]), int(d["A"])
            mdp = cls(kernel=np.asarray(d["P"], dtype=float),
                      reward=np.asarray(d["r"], dtype=float),
                      gamma=float(d["gamma"]),
                      rho=np.asarray(d["rho"], dtype=float))
        except KeyError as exc:
            raise MdpValidationError(f"missing field {exc.args[0]!r}") from None
        if (mdp.num_states, mdp.num_actions) != (S, A):
            raise MdpValidationError(
                f"declared S={S}, A={A} but arrays have S={mdp.num_states}, A={mdp.num_actions}")
        return mdp


def save_mdp(mdp: TabularMdp, path) -> None:
    Path(path).write_text(json.dumps(mdp.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_mdp(path) -> TabularMdp:
    return TabularMdp.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def check_policy(policy, num_states: int, num_actions: int) -> np.ndarray:
    """Return ``policy`` as an int array after range and shape checks."""
    pi = np.asarray(policy)
    if pi.shape != (num_states,):
        raise ValueError(f"policy must have shape ({num_states},), got {pi.shape}")
    if not np.issubdtype(pi.dtype, np.integer):
        if np.any(pi != np.round(pi)):
            raise ValueError("policy entries must be integers")
        pi = pi.astype(np.int64)
    if np.any(pi < 0) or np.any(pi >= num_actions):
        raise ValueError(f"policy entries must be in [0, {num_actions})")
    return pi.astype(np.int64)


def q_values(kernel: np.ndarray, reward: np.ndarray, gamma: float, v: np.ndarray) -> np.ndarray:
    return reward + gamma * kernel @ v


def greedy(q: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ``np.argmax`` already returns the lowest index on ties."""
    return np.argmax(q, axis=1).astype(np.int64)


def stopping_threshold(tol: float, gamma: float) -> float:
    """Successive-iterate gap that guarantees ``tol`` sup-norm error to the fixed point."""
    if gamma == 0.0:
        return math.inf
    return tol * (1.0 - gamma) / (2.0 * gamma)


def value_iteration_arrays(kernel, reward, gamma, tol, v0=None, history=None, max_iter=None):
    """Plain value iteration on raw arrays.

    Returns ``(v, policy, iterations, last_gap)``. If ``history`` is a list,
    every iterate is appended to it.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    S = kernel.shape[0]
    v = np.zeros(S) if v0 is None else np.array(v0, dtype=float)
    threshold = stopping_threshold(tol, gamma)
    it = 0
    while True:
        new = q_values(kernel, reward, gamma, v).max(axis=1)
        gap = float(np.max(np.abs(new - v)))
        v = new
        it += 1
        if history is not None:
            history.append(v.copy())
        if gap <= threshold or (max_iter is not None and it >= max_iter):
            break
    pi = greedy(q_values(kernel, reward, gamma, v))
    return v, pi, it, gap


def exact_value_iteration(mdp: TabularMdp, tol: float = 1e-8):
    """Optimal value and greedy policy of ``mdp`` with ``||v - v*||_inf <= tol``.

    Ties in the greedy step go to the lowest action index.
    """
    v, pi, _, _ = value_iteration_arrays(mdp.kernel, mdp.reward, mdp.gamma, tol)
    return v, pi


def _policy_matrices(mdp: TabularMdp, policy):
    pi = check_policy(policy, mdp.num_states, mdp.num_actions)
    idx = np.arange(mdp.num_states)
    return mdp.kernel[idx, pi], mdp.reward[idx, pi]


def policy_evaluation(mdp: TabularMdp, policy) -> np.ndarray:
    """Exact value of a deterministic policy via ``(I - gamma P_pi) v = r_pi``."""
    p_pi, r_pi = _policy_matrices(mdp, policy)
    S = mdp.num_states
    return np.linalg.solve(np.eye(S) - mdp.gamma * p_pi, r_pi)


def scalar_value(v, rho) -> float:
    """Expected value ``rho @ v`` under the initial distribution."""
    return float(np.dot(np.asarray(rho, dtype=float), np.asarray(v, dtype=float)))


def state_occupancy(mdp: TabularMdp, policy) -> np.ndarray:
    """Normalised discounted state occupancy ``(1-gamma) rho^T (I - gamma P_pi)^{-1}``."""
    p_pi, _ = _policy_matrices(mdp, policy)
    S = mdp.num_states
    d = np.linalg.solve((np.eye(S) - mdp.gamma * p_pi).T, (1.0 - mdp.gamma) * mdp.rho)
    d = np.clip(d, 0.0, None)
    return d / d.sum()


def occupancy_measure(mdp: TabularMdp, policy) -> np.ndarray:
    """Discounted state-action occupancy, shape ``(S, A)``.

    A deterministic policy puts all of a state's mass on its chosen action.
    """
    pi = check_policy(policy, mdp.num_states, mdp.num_actions)
    d_s = state_occupancy(mdp, pi)
    d = np.zeros((mdp.num_states, mdp.num_actions))
    d[np.arange(mdp.num_states), pi] = d_s
    return d


@dataclass(frozen=True)
class ConcentrabilityReport:
    clipped: float
    unclipped: float
    mu_min: float
    infinite: bool = False


def concentrability(mdp: TabularMdp, pi_star, mu) -> ConcentrabilityReport:
    """Single-policy concentrability of ``pi_star`` w.r.t. behaviour ``mu``.

    The clipped coefficient caps the occupancy at ``1/S`` before dividing.
    Only pairs visited by ``pi_star`` enter the maxima; a visited pair with
    ``mu == 0`` makes both coefficients infinite and sets ``infinite``.
    """
    mu = np.asarray(mu, dtype=float)
    S, A = mdp.num_states, mdp.num_actions
    if mu.shape != (S, A):
        raise ValueError(f"mu must have shape {(S, A)}, got {mu.shape}")
    if np.any(mu < 0) or abs(mu.sum() - 1.0) > 1e-10:
        raise ValueError("mu must be a nonnegative distribution summing to 1")
    d = occupancy_measure(mdp, pi_star)
    visited = d > 0
    mu_min = float(mu[mu > 0].min())
    if np.any(visited & (mu == 0)):
        return ConcentrabilityReport(math.inf, math.inf, mu_min, infinite=True)
    ratio = d[visited] / mu[visited]
    clipped = np.minimum(d[visited], 1.0 / S) / mu[visited]
    return ConcentrabilityReport(float(clipped.max()), float(ratio.max()), mu_min)
