"""Greedy Q-policy exposed through the classifier contract."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..core import CLASSES, MISSING, LabeledDataset, PrivacyChoice, PrivacyRecord
from ..envstate import CONTEXT, DENIALS, PERMISSION, Action, EnvState, StateSpace, denial_bucket
from ..models.base import BaseClassifier
from .envs import ReplayEnvironment
from .qlearning import QTable, RlConfig, train_q

SOFTEN = 0.01
QUERY_SETTING = PrivacyChoice.ASK

# Classifier training replays the training split; one episode is one pass worth of steps.
CLASSIFIER_RL = RlConfig(alpha=0.02, episodes=10)


def record_state(record: PrivacyRecord, schema) -> EnvState:
    denials = record.values[schema.index(DENIALS)]
    return EnvState(record.values[schema.index(CONTEXT)], record.values[schema.index(PERMISSION)],
                    QUERY_SETTING, denial_bucket(0.0 if denials is MISSING else float(denials)))


def action_to_choice(action: Action, current: PrivacyChoice = QUERY_SETTING) -> PrivacyChoice:
    return action.apply(current)


class QPolicyClassifier(BaseClassifier):
    """Predicts the setting the greedy policy would leave in force for a request."""

    name = "q"

    def __init__(self, cfg: RlConfig = CLASSIFIER_RL, q: QTable | None = None, schema=None):
        self.cfg = cfg
        self.q = q
        self.schema = schema
        self.log = None

    def fit(self, train: LabeledDataset, seed: int = 0) -> "QPolicyClassifier":
        env = ReplayEnvironment(train)
        cfg = replace(self.cfg, steps_per_episode=len(env), seed=seed)
        self.q, self.log = train_q(env, cfg, space=env.space)
        self.schema = train.schema
        return self

    def predict(self, record: PrivacyRecord) -> PrivacyChoice:
        state = record_state(record, self.schema)
        return action_to_choice(self.q.actions[self.q.greedy(state)])

    def predict_proba(self, record: PrivacyRecord) -> np.ndarray:
        p = np.full(len(CLASSES), SOFTEN)
        p[self.predict(record).index] = 1.0 - SOFTEN * (len(CLASSES) - 1)
        return p


def policy_as_classifier(q: QTable, schema) -> QPolicyClassifier:
    if q.space is None:
        q = QTable(q.n_states, q.actions, StateSpace.from_schema(schema), q.values)
    return QPolicyClassifier(q=q, schema=schema)
