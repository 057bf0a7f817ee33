"""Tabular Q-learning with a decaying epsilon-greedy behaviour policy."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from ..envstate import ACTIONS, StateSpace
from ..errors import ConfigInvalid, InvariantError
from ..seeding import rng_for


@dataclass(frozen=True)
class RlConfig:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon_start: float = 1.0
    epsilon_decay: float = 0.97
    epsilon_floor: float = 0.05
    episodes: int = 200
    steps_per_episode: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ConfigInvalid("alpha must be in (0, 1]")
        if not 0 <= self.gamma < 1:
            raise ConfigInvalid("gamma must be in [0, 1)")
        if not (0 <= self.epsilon_floor <= self.epsilon_start <= 1 and 0 < self.epsilon_decay <= 1):
            raise ConfigInvalid("invalid epsilon schedule")
        if self.episodes < 0 or self.steps_per_episode < 1:
            raise ConfigInvalid("episodes must be >= 0 and steps_per_episode >= 1")

    def epsilon(self, episode: int) -> float:
        return max(self.epsilon_floor, self.epsilon_start * self.epsilon_decay ** episode)


class QTable:
    """Dense (state, action) -> value table, zero-initialised."""

    def __init__(self, n_states: int, actions: Sequence = ACTIONS,
                 space: StateSpace | None = None, values: np.ndarray | None = None):
        self.actions = tuple(actions)
        self.space = space
        if values is None:
            values = np.zeros((n_states, len(self.actions)))
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (n_states, len(self.actions)):
            raise ConfigInvalid(f"Q values shape {self.values.shape} != {(n_states, len(self.actions))}")

    @classmethod
    def for_space(cls, space: StateSpace) -> "QTable":
        return cls(len(space), ACTIONS, space)

    @property
    def n_states(self) -> int:
        return self.values.shape[0]

    def state_index(self, state) -> int:
        if isinstance(state, (int, np.integer)):
            return int(state)
        return self.space.index(state)

    def action_index(self, action) -> int:
        return action if isinstance(action, (int, np.integer)) else self.actions.index(action)

    def __getitem__(self, key) -> float:
        s, a = key
        return float(self.values[self.state_index(s), self.action_index(a)])

    def row(self, state) -> np.ndarray:
        return self.values[self.state_index(state)]

    def greedy(self, state) -> int:
        return int(np.argmax(self.row(state)))

    def copy(self) -> "QTable":
        return QTable(self.n_states, self.actions, self.space, self.values.copy())

    def to_json(self) -> dict:
        if self.space is None:
            return {str(s): self.values[s].tolist() for s in range(self.n_states)}
        return {self.space.state(s).key(): self.values[s].tolist() for s in range(self.n_states)}

    def dumps(self) -> str:
        return json.dumps({"actions": [a.label for a in self.actions], "q": self.to_json()},
                          indent=1, sort_keys=False)

    @classmethod
    def from_json(cls, d: dict, space: StateSpace) -> "QTable":
        q = cls.for_space(space)
        for s in range(len(space)):
            key = space.state(s).key()
            if key in d:
                q.values[s] = np.asarray(d[key], dtype=float)
        return q


@dataclass(frozen=True)
class Transition:
    state: object
    action: object
    reward: float
    next_state: object


def q_update(q: QTable, t: Transition, cfg: RlConfig) -> QTable:
    """One step of Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).

    Returns a new table; only the (s, a) entry differs from ``q``.
    """
    out = q.copy()
    s, a = q.state_index(t.state), q.action_index(t.action)
    target = t.reward + cfg.gamma * float(q.values[q.state_index(t.next_state)].max())
    out.values[s, a] = q.values[s, a] + cfg.alpha * (target - q.values[s, a])
    return out


def epsilon_greedy(q: QTable, state, epsilon: float, rng: np.random.Generator):
    """Uniform random action with probability epsilon, else the first argmax."""
    if not 0 <= epsilon <= 1:
        raise ConfigInvalid("epsilon must be in [0, 1]")
    if rng.random() < epsilon:
        return q.actions[int(rng.integers(len(q.actions)))]
    return q.actions[q.greedy(state)]


class Environment(Protocol):
    """Episodic environment over integer state and action indices."""

    n_states: int
    actions: tuple

    def reset(self, rng: np.random.Generator, steps: int) -> int: ...

    def step(self, action: int) -> tuple[int, float]: ...


@dataclass
class EpisodeLog:
    rewards: list[float] = field(default_factory=list)
    steps: list[int] = field(default_factory=list)
    epsilons: list[float] = field(default_factory=list)

    @property
    def cumulative(self) -> list[float]:
        return list(itertools.accumulate(self.rewards))

    def __len__(self) -> int:
        return len(self.rewards)

    def to_csv(self) -> str:
        lines = ["episode,reward,cumulative_reward,epsilon"]
        for i, (r, c, e) in enumerate(zip(self.rewards, self.cumulative, self.epsilons), start=1):
            lines.append(f"{i},{r:g},{c:g},{e:.6f}")
        return "\n".join(lines) + "\n"


def train_q(env: Environment, cfg: RlConfig, q: QTable | None = None,
            space: StateSpace | None = None) -> tuple[QTable, EpisodeLog]:
    """Run ``cfg.episodes`` episodes of epsilon-greedy Q-learning on ``env``."""
    if q is None:
        q = QTable(env.n_states, env.actions, space)
    rng = rng_for(cfg.seed, "q-train")
    table = q.values.tolist()  # list rows: much faster than numpy scalar access
    n_actions = len(env.actions)
    alpha, gamma = cfg.alpha, cfg.gamma
    log = EpisodeLog()
    steps = cfg.steps_per_episode
    for episode in range(cfg.episodes):
        eps = cfg.epsilon(episode)
        explore = (rng.random(steps) < eps).tolist()
        random_actions = rng.integers(n_actions, size=steps).tolist()
        s = env.reset(rng, steps)
        total = 0.0
        for t in range(steps):
            row = table[s]
            a = random_actions[t] if explore[t] else row.index(max(row))
            s_next, r = env.step(a)
            row[a] += alpha * (r + gamma * max(table[s_next]) - row[a])
            total += r
            s = s_next
        log.rewards.append(total)
        log.steps.append(steps)
        log.epsilons.append(eps)
    out = QTable(env.n_states, env.actions, space, np.array(table))
    if not np.isfinite(out.values).all():
        raise InvariantError("Q table has non-finite values")
    return out, log


def q_bound(cfg: RlConfig, r_max: float = 1.0, q0: float = 0.0) -> float:
    return r_max / (1 - cfg.gamma) + abs(q0)
