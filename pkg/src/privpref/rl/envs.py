"""Environments for Q-learning: the persona simulator and a dataset replay."""

from __future__ import annotations

import bisect
from typing import Sequence

import numpy as np

from ..core import MISSING, FeatureSchema, LabeledDataset
from ..datagen import Persona, draw_denial_bucket, draw_request, request_reward, sample_transition
from ..envstate import ACTIONS, CONTEXT, DENIAL_BUCKETS, DENIALS, PERMISSION, StateSpace, denial_bucket


class PersonaEnvironment:
    """Permission requests from users drawn out of the persona mixture.

    By default every request comes from a freshly drawn user (persona and
    prior-denial bucket), so an episode samples the whole population. With
    ``single_user=True`` one user is drawn per episode and followed through
    ``datagen.sample_transition``.
    """

    def __init__(self, personas: Sequence[Persona], mixture_weights: Sequence[float],
                 schema: FeatureSchema, single_user: bool = False):
        self.personas = tuple(personas)
        self.cdf = np.cumsum(mixture_weights).tolist()
        self.schema = schema
        self.single_user = single_user
        self.space = StateSpace.from_schema(schema)
        self.n_states = len(self.space)
        self.actions = ACTIONS
        self._rng: np.random.Generator | None = None

    def _new_user(self) -> None:
        u = self._rng.random() * self.cdf[-1]
        self.persona = self.personas[min(bisect.bisect_right(self.cdf, u), len(self.personas) - 1)]
        bucket = draw_denial_bucket(self.persona, self.schema, self._rng)
        self.state = draw_request(self.persona, self.schema, self._rng, bucket)

    def reset(self, rng: np.random.Generator, steps: int = 0) -> int:
        self._rng = rng
        self._new_user()
        return self.space.index(self.state)

    def step(self, action: int) -> tuple[int, float]:
        if self.single_user:
            self.state, reward = sample_transition(self.persona, self.state, ACTIONS[action],
                                                   self._rng, self.schema)
        else:
            reward = request_reward(self.persona, self.state, ACTIONS[action], self._rng)
            self._new_user()
        return self.space.index(self.state), reward


class ReplayEnvironment:
    """Requests replayed from labeled records; the record's label is the user's choice.

    A step presents a uniformly sampled record with a uniformly drawn current
    setting; the reward is +1 when the resulting setting equals the label.
    """

    def __init__(self, ds: LabeledDataset):
        schema = ds.schema
        self.space = StateSpace.from_schema(schema)
        self.n_states = len(self.space)
        self.actions = ACTIONS
        ci, pi, di = schema.index(CONTEXT), schema.index(PERMISSION), schema.index(DENIALS)
        ctx = {t: i for i, t in enumerate(self.space.contexts)}
        perm = {t: i for i, t in enumerate(self.space.permissions)}
        bucket = {b: i for i, b in enumerate(DENIAL_BUCKETS)}
        rows = [r for r in ds.records
                if r.label is not MISSING and r.values[ci] is not MISSING
                and r.values[pi] is not MISSING and r.values[di] is not MISSING]
        if not rows:
            raise ValueError("no complete labeled records to replay")
        self.ctx = [ctx[r.values[ci]] for r in rows]
        self.perm = [perm[r.values[pi]] for r in rows]
        self.bucket = [bucket[denial_bucket(float(r.values[di]))] for r in rows]
        self.label = [r.label.index for r in rows]

    def __len__(self) -> int:
        return len(self.label)

    def _state(self, t: int) -> int:
        i = self._order[t]
        return self.space.index_parts(self.ctx[i], self.perm[i], self._current[t], self.bucket[i])

    def reset(self, rng: np.random.Generator, steps: int) -> int:
        self._order = rng.integers(len(self.label), size=steps + 1).tolist()
        self._current = rng.integers(3, size=steps + 1).tolist()
        self._t = 0
        return self._state(0)

    def step(self, action: int) -> tuple[int, float]:
        t = self._t
        setting = self._current[t] if action == 0 else action - 1
        reward = 1.0 if setting == self.label[self._order[t]] else -1.0
        self._t = t + 1
        return self._state(t + 1), reward
