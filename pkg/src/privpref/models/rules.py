"""Static rule-table baseline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..core import MISSING, FeatureSchema, LabeledDataset, PrivacyChoice, PrivacyRecord, parse_choice
from ..envstate import CONTEXT, PERMISSION
from .base import BaseClassifier

PROTECTED_PERMISSIONS = ("camera", "microphone", "location")
SENSITIVE_CONTEXTS = ("finance", "health")


@dataclass(frozen=True)
class RuleTable:
    rules: Mapping[tuple[str, str], PrivacyChoice] = field(default_factory=dict)
    default_choice: PrivacyChoice = PrivacyChoice.ALLOW

    def lookup(self, context, permission) -> PrivacyChoice:
        return self.rules.get((context, permission), self.default_choice)

    def to_json(self) -> dict:
        return {"rules": {f"{c}|{p}": v.token for (c, p), v in self.rules.items()},
                "default_choice": self.default_choice.token}

    @classmethod
    def from_json(cls, d: dict) -> "RuleTable":
        rules = {tuple(k.split("|")): parse_choice(v) for k, v in d.get("rules", {}).items()}
        return cls(rules, parse_choice(d.get("default_choice", "Allow")))


def default_rules(schema: FeatureSchema) -> RuleTable:
    """Deny camera/microphone/location anywhere, Ask in finance/health, else Allow."""
    rules = {}
    for ctx in schema[CONTEXT].domain:
        for perm in schema[PERMISSION].domain:
            if perm in PROTECTED_PERMISSIONS:
                rules[(ctx, perm)] = PrivacyChoice.DENY
            elif ctx in SENSITIVE_CONTEXTS:
                rules[(ctx, perm)] = PrivacyChoice.ASK
            else:
                rules[(ctx, perm)] = PrivacyChoice.ALLOW
    return RuleTable(rules, PrivacyChoice.ALLOW)


def rule_predict(rules: RuleTable, record: PrivacyRecord, schema: FeatureSchema) -> PrivacyChoice:
    ctx = record.values[schema.index(CONTEXT)]
    perm = record.values[schema.index(PERMISSION)]
    if ctx is MISSING or perm is MISSING:
        return rules.default_choice
    return rules.lookup(ctx, perm)


class RuleClassifier(BaseClassifier):
    """Ignores the training data; predicts from a fixed rule table."""

    name = "rule"

    def __init__(self, rules: RuleTable | None = None):
        self.rules = rules
        self.schema: FeatureSchema | None = None

    def fit(self, train: LabeledDataset, seed: int = 0) -> "RuleClassifier":
        self.schema = train.schema
        if self.rules is None:
            self.rules = default_rules(train.schema)
        return self

    def predict(self, record: PrivacyRecord) -> PrivacyChoice:
        return rule_predict(self.rules, record, self.schema)

    def predict_proba(self, record: PrivacyRecord) -> np.ndarray:
        p = np.zeros(3)
        p[self.predict(record).index] = 1.0
        return p
