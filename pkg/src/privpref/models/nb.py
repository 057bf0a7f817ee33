"""Categorical Naive Bayes with Laplace smoothing.

Numeric features are discretized into at most four bins whose edges are
the training quartiles. Scoring happens in log space and is normalised
over the three classes, which is Bayes' rule with P(X) as the normaliser.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import MISSING, N_CLASSES, FeatureSchema, LabeledDataset, PrivacyRecord
from ..errors import ConfigInvalid
from .base import BaseClassifier, label_indices, labeled_records


@dataclass(frozen=True)
class NbModel:
    schema: FeatureSchema
    class_priors: np.ndarray            # (C,)
    conditionals: tuple[np.ndarray, ...]  # per feature, (C, m_i); rows sum to 1
    bin_edges: tuple[np.ndarray | None, ...]  # quartile edges for numeric features
    smoothing: float = 1.0

    def bin_index(self, j: int, value) -> int:
        f = self.schema.features[j]
        if f.is_categorical:
            return f.domain.index(value)
        return int(np.searchsorted(self.bin_edges[j], float(value), side="left"))

    def to_json(self) -> dict:
        return {
            "class_priors": self.class_priors.tolist(),
            "conditionals": [c.tolist() for c in self.conditionals],
            "bin_edges": [None if e is None else e.tolist() for e in self.bin_edges],
            "smoothing": self.smoothing,
        }

    @classmethod
    def from_json(cls, schema: FeatureSchema, d: dict) -> "NbModel":
        return cls(schema, np.asarray(d["class_priors"], dtype=float),
                   tuple(np.asarray(c, dtype=float) for c in d["conditionals"]),
                   tuple(None if e is None else np.asarray(e, dtype=float) for e in d["bin_edges"]),
                   float(d["smoothing"]))


def quartile_edges(values: Sequence[float]) -> np.ndarray:
    if len(values) == 0:
        return np.zeros(0)
    return np.unique(np.quantile(np.asarray(values, dtype=float), [0.25, 0.5, 0.75]))


def nb_fit(train: LabeledDataset, smoothing: float = 1.0) -> NbModel:
    if smoothing < 1:
        raise ConfigInvalid("smoothing must be >= 1")
    records = labeled_records(train)
    schema = train.schema
    y = label_indices(records)
    n = len(records)
    class_counts = np.bincount(y, minlength=N_CLASSES).astype(float)
    priors = (class_counts + smoothing) / (n + smoothing * N_CLASSES)

    edges: list[np.ndarray | None] = []
    tables = []
    for j, f in enumerate(schema.features):
        observed = [(r.values[j], yi) for r, yi in zip(records, y) if r.values[j] is not MISSING]
        if f.is_categorical:
            edges.append(None)
            m = len(f.domain)
            lookup = {t: i for i, t in enumerate(f.domain)}
            idx = [lookup[v] for v, _ in observed]
        else:
            e = quartile_edges([v for v, _ in observed])
            edges.append(e)
            m = len(e) + 1
            idx = np.searchsorted(e, [float(v) for v, _ in observed], side="left").tolist()
        counts = np.zeros((N_CLASSES, m))
        for b, (_, yi) in zip(idx, observed):
            counts[yi, b] += 1
        per_class = counts.sum(axis=1, keepdims=True)
        tables.append((counts + smoothing) / (per_class + smoothing * m))
    return NbModel(schema, priors, tuple(tables), tuple(edges), float(smoothing))


def nb_log_scores(model: NbModel, record: PrivacyRecord) -> np.ndarray:
    scores = np.log(model.class_priors).copy()
    for j, v in enumerate(record.values):
        if v is MISSING:
            continue
        scores += np.log(model.conditionals[j][:, model.bin_index(j, v)])
    return scores


def nb_posterior(model: NbModel, record: PrivacyRecord) -> np.ndarray:
    scores = nb_log_scores(model, record)
    w = np.exp(scores - scores.max())
    return w / w.sum()


class NaiveBayesClassifier(BaseClassifier):
    name = "nb"

    def __init__(self, smoothing: float = 1.0):
        self.smoothing = smoothing
        self.model: NbModel | None = None

    def fit(self, train: LabeledDataset, seed: int = 0) -> "NaiveBayesClassifier":
        self.model = nb_fit(train, self.smoothing)
        return self

    def predict_proba(self, record: PrivacyRecord) -> np.ndarray:
        return nb_posterior(self.model, record)

    def predict_proba_many(self, records) -> np.ndarray:
        model = self.model
        log_tables = [np.log(c) for c in model.conditionals]
        scores = np.tile(np.log(model.class_priors), (len(records), 1))
        for j in range(len(model.schema)):
            idx = np.array([-1 if r.values[j] is MISSING else model.bin_index(j, r.values[j])
                            for r in records], dtype=np.int64)
            contrib = log_tables[j][:, np.maximum(idx, 0)].T
            contrib[idx < 0] = 0.0
            scores += contrib
        w = np.exp(scores - scores.max(axis=1, keepdims=True))
        return w / w.sum(axis=1, keepdims=True)
