"""Comparison planners: reward-penalised LCB value iteration and plain empirical DP."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import EmpiricalModel
from .mdp import value_iteration_arrays


@dataclass(frozen=True)
class LcbConfig:
    delta: float = 0.1
    bonus_scale: float = 1.0

    def __post_init__(self):
        if not 1e-6 <= self.delta <= 0.5:
            raise ValueError(f"delta must be in [1e-6, 0.5], got {self.delta}")
        if not self.bonus_scale > 0:
            raise ValueError("bonus_scale must be positive")


def lcb_penalty(counts, cfg: LcbConfig, gamma: float) -> np.ndarray:
    """Hoeffding-style reward penalty, capped at ``1/(1-gamma)``.

    ``b(s,a) = c_b * sqrt(log(S*A*N/delta) / N(s,a)) / (1-gamma)``; unvisited
    pairs receive the cap.
    """
    counts = np.asarray(counts)
    S, A = counts.shape
    n_total = max(int(counts.sum()), 1)
    cap = 1.0 / (1.0 - gamma)
    bonus = cfg.bonus_scale * np.sqrt(math.log(S * A * n_total / cfg.delta)
                                      / np.maximum(counts, 1)) / (1.0 - gamma)
    return np.where(counts > 0, np.minimum(cap, bonus), cap)


def lcb_value_iteration(model: EmpiricalModel, cfg: LcbConfig, gamma: float, tol: float = 1e-8):
    """Value iteration on the empirical MDP with rewards ``max(0, r_hat - b)``."""
    reward = np.maximum(0.0, model.reward - lcb_penalty(model.counts, cfg, gamma))
    v, pi, _, _ = value_iteration_arrays(model.kernel, reward, gamma, tol)
    return v, pi


def nonrobust_empirical_vi(model: EmpiricalModel, gamma: float, tol: float = 1e-8):
    """Optimal value and policy of the empirical MDP, taken at face value."""
    v, pi, _, _ = value_iteration_arrays(model.kernel, model.reward, gamma, tol)
    return v, pi
