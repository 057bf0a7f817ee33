"""Local differential privacy for sensitive cells.

Categorical cells go through m-ary randomized response; numeric cells get
bounded Laplace noise. Each cell draws from its own stream keyed by
``(seed, record_id, feature index)``.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import MISSING, LabeledDataset
from ..errors import ConfigInvalid, NoSensitiveFeatures
from .config import PreprocessConfig


def keep_probability(epsilon: float, m: int) -> float:
    """P(report true value) = e^eps / (e^eps + m - 1), stable for large eps."""
    if m <= 1:
        return 1.0
    return 1.0 / (1.0 + (m - 1) * math.exp(-epsilon))


def laplace_scale(span: float, epsilon: float) -> float:
    return span / epsilon


def _cell_rng(seed: int, record_id: int, feature_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(record_id, feature_index)))


def randomized_response(value: str, domain: tuple[str, ...], epsilon: float,
                        rng: np.random.Generator) -> str:
    p_keep = keep_probability(epsilon, len(domain))
    if rng.random() < p_keep:
        return value
    others = [t for t in domain if t != value]
    return others[int(rng.integers(len(others)))]


def dp_randomize(ds: LabeledDataset, cfg: PreprocessConfig) -> LabeledDataset:
    if not cfg.dp_enabled:
        raise ConfigInvalid("dp_randomize called with dp_enabled=False")
    sensitive = ds.schema.sensitive
    if not sensitive:
        raise NoSensitiveFeatures("schema marks no feature as sensitive")
    feats = ds.schema.features
    eps = cfg.dp_epsilon
    records = []
    for r in ds.records:
        values = list(r.values)
        for j in sensitive:
            v = values[j]
            if v is MISSING:
                continue
            rng = _cell_rng(cfg.seed, r.record_id, j)
            f = feats[j]
            if f.is_categorical:
                values[j] = randomized_response(v, f.domain, eps, rng)
            else:
                noisy = float(v) + rng.laplace(0.0, laplace_scale(f.span, eps))
                values[j] = min(max(noisy, f.min), f.max)
        records.append(r.with_values(values))
    return LabeledDataset(ds.schema, tuple(records), ds.provenance, validate=False)
