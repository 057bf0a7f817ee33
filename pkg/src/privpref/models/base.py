"""Classifier contract shared by every predictor.

A classifier is fitted on a LabeledDataset and then maps a record to a
probability vector over the fixed class order Allow, Deny, Ask.
"""

from __future__ import annotations

from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from ..core import CLASSES, MISSING, N_CLASSES, LabeledDataset, PrivacyChoice, PrivacyRecord
from ..errors import EmptyTrainingSet


def argmax_choice(proba: np.ndarray) -> PrivacyChoice:
    # np.argmax returns the first maximum, i.e. ties go Allow < Deny < Ask
    return CLASSES[int(np.argmax(proba))]


@runtime_checkable
class Classifier(Protocol):
    name: str

    def fit(self, train: LabeledDataset, seed: int = 0) -> "Classifier": ...

    def predict_proba(self, record: PrivacyRecord) -> np.ndarray: ...

    def predict(self, record: PrivacyRecord) -> PrivacyChoice: ...

    def predict_many(self, records: Sequence[PrivacyRecord]) -> list[PrivacyChoice]: ...


class BaseClassifier:
    """Default ``predict``/``predict_many`` built on ``predict_proba_many``."""

    name = "base"

    def predict_proba_many(self, records: Sequence[PrivacyRecord]) -> np.ndarray:
        return np.array([self.predict_proba(r) for r in records]).reshape(-1, N_CLASSES)

    def predict(self, record: PrivacyRecord) -> PrivacyChoice:
        return argmax_choice(self.predict_proba(record))

    def predict_many(self, records: Sequence[PrivacyRecord]) -> list[PrivacyChoice]:
        proba = self.predict_proba_many(records)
        return [CLASSES[i] for i in np.argmax(proba, axis=1)]


def labeled_records(ds: LabeledDataset) -> list[PrivacyRecord]:
    recs = [r for r in ds.records if r.label is not MISSING]
    if not recs:
        raise EmptyTrainingSet("training set has no labeled records")
    return recs


def label_indices(records: Sequence[PrivacyRecord]) -> np.ndarray:
    return np.array([r.label.index for r in records], dtype=np.int64)
