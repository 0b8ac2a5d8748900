"""Garnet random MDPs with Gaussian kernel rows and rewards."""

from __future__ import annotations

import numpy as np

from .mdp import TabularMdp


def garnet_draws(num_states: int, num_actions: int, seed: int):
    """Normalised kernel and the raw (unscaled) Gaussian rewards."""
    if num_states < 2:
        raise ValueError("Garnet MDPs need at least 2 states")
    if num_actions < 1:
        raise ValueError("Garnet MDPs need at least 1 action")
    S, A = num_states, num_actions
    rng = np.random.default_rng(seed)
    kernel = np.empty((S, A, S))
    raw_reward = np.empty((S, A))
    for s in range(S):
        for a in range(A):
            omega, sigma, nu, psi = rng.uniform(0.0, 100.0, size=4)
            row = np.clip(rng.normal(omega, sigma, size=S), 0.0, None)
            total = row.sum()
            kernel[s, a] = row / total if total > 0 else np.full(S, 1.0 / S)
            raw_reward[s, a] = rng.normal(nu, psi)
    return kernel, raw_reward


def generate_garnet(num_states: int, num_actions: int, seed: int,
                    gamma: float = 0.95, rho=None) -> TabularMdp:
    """Sample a Garnet MDP.

    For each pair, ``omega, sigma, nu, psi ~ U[0, 100]``; the kernel row is
    ``S`` draws of ``N(omega, sigma)`` with negatives clamped to zero and then
    normalised, and the raw reward is one draw of ``N(nu, psi)``. Rewards are
    rescaled affinely to [0, 1] over the whole grid.
    """
    S, A = num_states, num_actions
    kernel, raw_reward = garnet_draws(S, A, seed)
    lo, hi = raw_reward.min(), raw_reward.max()
    reward = np.full((S, A), 0.5) if hi == lo else (raw_reward - lo) / (hi - lo)
    rho = np.full(S, 1.0 / S) if rho is None else rho
    return TabularMdp(kernel=kernel, reward=reward, gamma=gamma, rho=rho)
