"""State and action types of the privacy-settings environment."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .core import CLASSES, PrivacyChoice

CONTEXT = "context"
PERMISSION = "permission"
DENIALS = "prior_denials"

DENIAL_BUCKETS = ("0", "1-3", "4+")


def denial_bucket(prior_denials: float) -> str:
    # imputed counts can be fractional; round to the nearest count first
    if prior_denials < 0.5:
        return "0"
    if prior_denials < 3.5:
        return "1-3"
    return "4+"


class Action(enum.Enum):
    RETAIN = 0
    SET_ALLOW = 1
    SET_DENY = 2
    SET_ASK = 3

    @property
    def label(self) -> str:
        return {0: "Retain", 1: "SetAllow", 2: "SetDeny", 3: "SetAsk"}[self.value]

    def apply(self, current: PrivacyChoice) -> PrivacyChoice:
        """The setting in force after taking this action."""
        if self is Action.RETAIN:
            return current
        return _SETS[self]


ACTIONS: tuple[Action, ...] = tuple(Action)
N_ACTIONS = len(ACTIONS)
_SETS = {Action.SET_ALLOW: PrivacyChoice.ALLOW, Action.SET_DENY: PrivacyChoice.DENY,
         Action.SET_ASK: PrivacyChoice.ASK}


@dataclass(frozen=True)
class EnvState:
    context: str
    permission: str
    current_setting: PrivacyChoice
    denial_bucket: str

    def key(self) -> str:
        return f"{self.context}|{self.permission}|{self.current_setting.token}|{self.denial_bucket}"


class StateSpace:
    """Dense indexing of every EnvState over the declared domains."""

    def __init__(self, contexts: tuple[str, ...], permissions: tuple[str, ...]):
        self.contexts = tuple(contexts)
        self.permissions = tuple(permissions)
        self._ctx = {c: i for i, c in enumerate(self.contexts)}
        self._perm = {p: i for i, p in enumerate(self.permissions)}
        self._bucket = {b: i for i, b in enumerate(DENIAL_BUCKETS)}

    @classmethod
    def from_schema(cls, schema) -> "StateSpace":
        return cls(schema[CONTEXT].domain, schema[PERMISSION].domain)

    def __len__(self) -> int:
        return len(self.contexts) * len(self.permissions) * len(CLASSES) * len(DENIAL_BUCKETS)

    def index(self, s: EnvState) -> int:
        return self.index_parts(self._ctx[s.context], self._perm[s.permission],
                                s.current_setting.index, self._bucket[s.denial_bucket])

    def index_parts(self, ctx: int, perm: int, setting: int, bucket: int) -> int:
        return ((ctx * len(self.permissions) + perm) * len(CLASSES) + setting) * len(DENIAL_BUCKETS) + bucket

    def state(self, index: int) -> EnvState:
        index, bucket = divmod(index, len(DENIAL_BUCKETS))
        index, setting = divmod(index, len(CLASSES))
        ctx, perm = divmod(index, len(self.permissions))
        return EnvState(self.contexts[ctx], self.permissions[perm], CLASSES[setting],
                        DENIAL_BUCKETS[bucket])

    def states(self):
        return [self.state(i) for i in range(len(self))]
