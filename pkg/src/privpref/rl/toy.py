"""Small tabular MDPs with exact solutions, used to check Q-learning."""

from __future__ import annotations

import numpy as np


class DeterministicMDP:
    """Finite MDP with deterministic transitions ``next_state[s][a]`` and rewards."""

    def __init__(self, next_state, reward):
        self.next_state = np.asarray(next_state, dtype=np.int64)
        self.reward = np.asarray(reward, dtype=float)
        self.n_states, n_actions = self.next_state.shape
        self.actions = tuple(range(n_actions))

    # Environment protocol
    def reset(self, rng: np.random.Generator, steps: int = 0) -> int:
        self._s = int(rng.integers(self.n_states))
        return self._s

    def step(self, action: int) -> tuple[int, float]:
        s = self._s
        self._s = int(self.next_state[s, action])
        return self._s, float(self.reward[s, action])

    def value_iteration(self, gamma: float, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
        """Optimal Q by repeated Bellman backups until the sup-norm change < tol."""
        q = np.zeros_like(self.reward)
        for _ in range(max_iter):
            new = self.reward + gamma * q.max(axis=1)[self.next_state]
            if np.max(np.abs(new - q)) < tol:
                return new
            q = new
        raise RuntimeError("value iteration did not converge")


def chain_mdp() -> DeterministicMDP:
    """Three states in a chain whose right end wraps to the start.

    Action 0 steps left (staying put at the start) for -1; action 1 steps
    right, paying -1 out of the first state and +1 out of the others.
    """
    next_state = [[0, 1], [0, 2], [1, 0]]
    reward = [[-1, -1], [-1, 1], [-1, 1]]
    return DeterministicMDP(next_state, reward)
