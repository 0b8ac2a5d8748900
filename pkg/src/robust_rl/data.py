"""Offline datasets drawn from a behaviour distribution, and the empirical MDP."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mdp import TabularMdp, check_policy


class DatasetError(ValueError):
    """Malformed or inconsistent offline dataset."""


def _check_behavior(mu, S: int, A: int) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (S, A):
        raise DatasetError(f"behaviour distribution must have shape {(S, A)}, got {mu.shape}")
    if np.any(~np.isfinite(mu)) or np.any(mu < 0) or abs(mu.sum() - 1.0) > 1e-10:
        raise DatasetError("behaviour distribution must be nonnegative and sum to 1")
    return mu


@dataclass(frozen=True, eq=False)
class OfflineDataset:
    """``N`` transition tuples ``(s, a, s_next, r)`` stored column-wise."""

    s: np.ndarray
    a: np.ndarray
    s_next: np.ndarray
    r: np.ndarray
    num_states: int
    num_actions: int
    mu: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        cols = [np.asarray(self.s, dtype=np.int64), np.asarray(self.a, dtype=np.int64),
                np.asarray(self.s_next, dtype=np.int64), np.asarray(self.r, dtype=float)]
        if len({c.shape for c in cols}) != 1 or cols[0].ndim != 1:
            raise DatasetError("tuple columns must be 1-d and of equal length")
        S, A = self.num_states, self.num_actions
        s, a, s_next, _ = cols
        if len(s) and (s.min() < 0 or s.max() >= S or s_next.min() < 0 or s_next.max() >= S):
            raise DatasetError(f"state index out of range [0, {S})")
        if len(a) and (a.min() < 0 or a.max() >= A):
            raise DatasetError(f"action index out of range [0, {A})")
        for name, col in zip(("s", "a", "s_next", "r"), cols):
            col.setflags(write=False)
            object.__setattr__(self, name, col)

    def __len__(self) -> int:
        return len(self.s)

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def counts_sa(self) -> np.ndarray:
        counts = np.zeros((self.num_states, self.num_actions), dtype=np.int64)
        np.add.at(counts, (self.s, self.a), 1)
        return counts

    @property
    def counts_s(self) -> np.ndarray:
        return self.counts_sa.sum(axis=1)


def sample_dataset(mdp: TabularMdp, mu, n: int, seed: int) -> OfflineDataset:
    """Draw ``n`` i.i.d. tuples: ``(s, a) ~ mu``, ``s' ~ P[s, a]``, ``r = r(s, a)``.

    Uses a Philox (counter-based) stream keyed by ``seed``; tuple ``i``
    consumes the ``i``-th pair of uniforms, so the output depends only on
    ``(mdp, mu, n, seed)``.
    """
    S, A = mdp.num_states, mdp.num_actions
    mu = _check_behavior(mu, S, A)
    if int(n) != n or n < 1:
        raise DatasetError(f"n must be a positive integer, got {n}")
    n = int(n)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    u = rng.random((n, 2))

    cdf = np.cumsum(mu.ravel())
    flat = np.searchsorted(cdf, u[:, 0] * cdf[-1], side="right")
    flat = np.minimum(flat, S * A - 1)
    s, a = np.divmod(flat, A)

    row_cdf = np.cumsum(mdp.kernel, axis=2)[s, a]
    target = u[:, 1] * row_cdf[:, -1]
    s_next = (row_cdf <= target[:, None]).sum(axis=1)
    s_next = np.minimum(s_next, S - 1)
    return OfflineDataset(s, a, s_next, mdp.reward[s, a], S, A, mu=mu.copy(), seed=seed)


def behavior_uniform(num_states: int, num_actions: int) -> np.ndarray:
    return np.full((num_states, num_actions), 1.0 / (num_states * num_actions))


def random_action(num_actions: int, seed: int) -> int:
    """The single action ``eta`` used by the partial-coverage behaviour."""
    return int(np.random.default_rng(seed).integers(num_actions))


def behavior_partial(pi_star, num_actions: int, eta: int) -> np.ndarray:
    """Half the per-state mass on ``pi_star(s)``, half on the fixed action ``eta``.

    States are weighted uniformly, so each mass is ``1/(2S)``; they merge to
    ``1/S`` where ``pi_star(s) == eta``.
    """
    S = len(pi_star)
    pi = check_policy(pi_star, S, num_actions)
    if not 0 <= eta < num_actions:
        raise ValueError(f"eta must be in [0, {num_actions})")
    mu = np.zeros((S, num_actions))
    mu[np.arange(S), pi] += 0.5 / S
    mu[:, eta] += 0.5 / S
    return mu


@dataclass(frozen=True, eq=False)
class EmpiricalModel:
    """Count-based estimate of the kernel and reward.

    Unvisited pairs become self-loops with zero reward.
    """

    kernel: np.ndarray
    reward: np.ndarray
    counts: np.ndarray

    @property
    def num_states(self) -> int:
        return self.kernel.shape[0]

    @property
    def num_actions(self) -> int:
        return self.kernel.shape[1]

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def estimate_model(data: OfflineDataset, num_states: int | None = None,
                   num_actions: int | None = None) -> EmpiricalModel:
    S = data.num_states if num_states is None else num_states
    A = data.num_actions if num_actions is None else num_actions
    if len(data) and (data.s.max() >= S or data.s_next.max() >= S or data.a.max() >= A):
        raise DatasetError("dataset indices exceed the declared state/action counts")

    transitions = np.zeros((S, A, S))
    np.add.at(transitions, (data.s, data.a, data.s_next), 1.0)
    counts = transitions.sum(axis=2).astype(np.int64)

    reward = np.zeros((S, A))
    first = np.full((S, A), np.nan)
    # keep the first observed reward per pair, then demand all others match it
    order = np.arange(len(data))[::-1]
    first[data.s[order], data.a[order]] = data.r[order]
    if len(data):
        mismatch = data.r != first[data.s, data.a]
        if np.any(mismatch):
            i = int(np.flatnonzero(mismatch)[0])
            raise DatasetError(
                f"inconsistent rewards at (s={data.s[i]}, a={data.a[i]}): "
                f"{data.r[i]!r} vs {first[data.s[i], data.a[i]]!r}")
    seen = counts > 0
    reward[seen] = first[seen]

    kernel = np.zeros((S, A, S))
    kernel[seen] = transitions[seen] / counts[seen][:, None]
    unseen_s, unseen_a = np.nonzero(~seen)
    kernel[unseen_s, unseen_a, unseen_s] = 1.0
    return EmpiricalModel(kernel, reward, counts)


def save_dataset(data: OfflineDataset, path) -> None:
    lines = [f"#S={data.num_states},A={data.num_actions},seed={data.seed}"]
    lines += [f"{s},{a},{sn},{r!r}" for s, a, sn, r in
              zip(data.s.tolist(), data.a.tolist(), data.s_next.tolist(), data.r.tolist())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_dataset(path) -> OfflineDataset:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("#"):
        raise DatasetError(f"{path}: missing '#S=..,A=..,seed=..' header")
    try:
        header = dict(item.split("=", 1) for item in text[0][1:].split(","))
        S, A = int(header["S"]), int(header["A"])
        seed = None if header.get("seed", "None") == "None" else int(header["seed"])
    except (KeyError, ValueError) as exc:
        raise DatasetError(f"{path}: bad header {text[0]!r}") from exc
    rows = [line.split(",") for line in text[1:] if line.strip()]
    try:
        s = [int(r[0]) for r in rows]
        a = [int(r[1]) for r in rows]
        sn = [int(r[2]) for r in rows]
        rew = [float(r[3]) for r in rows]
    except (IndexError, ValueError) as exc:
        raise DatasetError(f"{path}: malformed record") from exc
    return OfflineDataset(np.array(s, dtype=np.int64), np.array(a, dtype=np.int64),
                          np.array(sn, dtype=np.int64), np.array(rew, dtype=float),
                          S, A, seed=seed)
