from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Mapping, Union

from ..core import PrivacyChoice, parse_choice
from ..errors import ConfigInvalid

AugmentTarget = Union[int, Mapping[str, int], None]


@dataclass(frozen=True)
class PreprocessConfig:
    knn_k: int = 5
    dp_epsilon: float = 1.0
    dp_enabled: bool = True
    anonymity_k: int = 5
    augment_target: AugmentTarget = None
    seed: int = 0

    def __post_init__(self):
        if self.knn_k < 1:
            raise ConfigInvalid("knn_k must be >= 1")
        if not self.dp_epsilon > 0:
            raise ConfigInvalid("dp_epsilon must be > 0")
        if self.anonymity_k < 1:
            raise ConfigInvalid("anonymity_k must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigInvalid("seed must be a 64-bit unsigned integer")

    def targets(self) -> dict[PrivacyChoice, int]:
        """Per-class minimum counts requested for augmentation."""
        t = self.augment_target
        if t is None:
            return {}
        if isinstance(t, int):
            return {c: t for c in PrivacyChoice}
        return {parse_choice(k): int(v) for k, v in t.items()}

    def to_json(self) -> dict:
        d = asdict(self)
        if isinstance(self.augment_target, Mapping):
            d["augment_target"] = dict(self.augment_target)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PreprocessConfig":
        known = {k: d[k] for k in ("knn_k", "dp_epsilon", "dp_enabled", "anonymity_k",
                                   "augment_target", "seed") if k in d}
        try:
            return cls(**known)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None

    @classmethod
    def load(cls, path) -> "PreprocessConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))
