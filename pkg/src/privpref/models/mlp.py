"""Two-hidden-layer perceptron trained with mini-batch gradient descent.

Forward pass::

    h1 = relu(W1 x + b1)
    h2 = relu(W2 h1 + b2)
    y  = softmax(W3 h2 + b3)

Loss is the mean cross-entropy over a batch. Gradients are exact
backpropagation; there is no momentum, weight decay or adaptive step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import MISSING, N_CLASSES, FeatureSchema, LabeledDataset, PrivacyRecord
from ..errors import ConfigInvalid, DataError, DimensionMismatch, NonFiniteLoss
from ..seeding import rng_for
from .base import BaseClassifier, label_indices, labeled_records

PROB_FLOOR = 1e-12
PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3")


@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple[int, int] = (32, 16)
    learning_rate: float = 0.05
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if len(self.hidden) != 2 or min(self.hidden) < 1:
            raise ConfigInvalid("hidden must be two positive layer widths")
        if self.learning_rate < 0 or self.epochs < 0 or self.batch_size < 1:
            raise ConfigInvalid("invalid MLP training constants")


@dataclass
class MlpParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray

    @property
    def input_width(self) -> int:
        return self.W1.shape[1]

    def as_dict(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in PARAM_NAMES}

    def copy(self) -> "MlpParams":
        return MlpParams(**{k: v.copy() for k, v in self.as_dict().items()})

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.as_dict().values())

    def to_json(self) -> dict:
        return {k: v.tolist() for k, v in self.as_dict().items()}

    @classmethod
    def from_json(cls, d: dict) -> "MlpParams":
        return cls(**{k: np.asarray(d[k], dtype=float) for k in PARAM_NAMES})

    @classmethod
    def zeros(cls, n_inputs: int, hidden=(32, 16), n_classes: int = N_CLASSES) -> "MlpParams":
        d1, d2 = hidden
        return cls(np.zeros((d1, n_inputs)), np.zeros(d1), np.zeros((d2, d1)), np.zeros(d2),
                   np.zeros((n_classes, d2)), np.zeros(n_classes))


def init_params(n_inputs: int, cfg: MlpConfig, rng: np.random.Generator) -> MlpParams:
    """Uniform(-s, s) weights with s = sqrt(6 / (fan_in + fan_out)); zero biases."""
    sizes = (n_inputs, *cfg.hidden, N_CLASSES)
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        s = np.sqrt(6.0 / (fan_in + fan_out))
        layers.append(rng.uniform(-s, s, size=(fan_out, fan_in)))
        layers.append(np.zeros(fan_out))
    return MlpParams(*layers)


class InputEncoder:
    """One-hot categoricals plus min-max scaled numerics, in schema order."""

    def __init__(self, schema: FeatureSchema):
        self.schema = schema
        self.offsets = []
        width = 0
        for f in schema.features:
            self.offsets.append(width)
            width += len(f.domain) if f.is_categorical else 1
        self.width = width
        self._lookup = [{t: i for i, t in enumerate(f.domain)} if f.is_categorical else None
                        for f in schema.features]

    def encode(self, records: Sequence[PrivacyRecord]) -> np.ndarray:
        X = np.zeros((len(records), self.width))
        for j, f in enumerate(self.schema.features):
            off = self.offsets[j]
            for i, r in enumerate(records):
                v = r.values[j]
                if v is MISSING:
                    raise DataError(f"record {r.record_id}: {f.name} is missing; impute first")
                if f.is_categorical:
                    X[i, off + self._lookup[j][v]] = 1.0
                else:
                    X[i, off] = (float(v) - f.min) / f.span
        return X


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def mlp_forward(params: MlpParams, x: np.ndarray):
    """Return (h1, h2, y_hat) for one input vector or a batch of rows."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.input_width:
        raise DimensionMismatch(f"input width {x.shape[-1]} != {params.input_width}")
    h1 = relu(x @ params.W1.T + params.b1)
    h2 = relu(h1 @ params.W2.T + params.b2)
    y_hat = softmax(h2 @ params.W3.T + params.b3)
    return h1, h2, y_hat


def cross_entropy(y_hat: np.ndarray, y: np.ndarray) -> float:
    """-sum y log y_hat per example, averaged over a batch."""
    y_hat = np.clip(np.asarray(y_hat, dtype=float), PROB_FLOOR, None)
    y = np.asarray(y, dtype=float)
    per_example = -(y * np.log(y_hat)).sum(axis=-1)
    return float(np.mean(per_example))


def one_hot(labels: np.ndarray, n_classes: int = N_CLASSES) -> np.ndarray:
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def batch_loss(params: MlpParams, X: np.ndarray, Y: np.ndarray) -> float:
    return cross_entropy(mlp_forward(params, X)[2], Y)


def gradients(params: MlpParams, X: np.ndarray, Y: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy on (X, Y) and its gradient for every parameter."""
    n = X.shape[0]
    z1 = X @ params.W1.T + params.b1
    h1 = relu(z1)
    z2 = h1 @ params.W2.T + params.b2
    h2 = relu(z2)
    y_hat = softmax(h2 @ params.W3.T + params.b3)
    loss = cross_entropy(y_hat, Y)

    d3 = (y_hat - Y) / n
    g = {"W3": d3.T @ h2, "b3": d3.sum(axis=0)}
    d2 = (d3 @ params.W3) * (z2 > 0)
    g["W2"] = d2.T @ h1
    g["b2"] = d2.sum(axis=0)
    d1 = (d2 @ params.W2) * (z1 > 0)
    g["W1"] = d1.T @ X
    g["b1"] = d1.sum(axis=0)
    return loss, g


def train_arrays(cfg: MlpConfig, X: np.ndarray, y: np.ndarray,
                 params: MlpParams | None = None) -> tuple[MlpParams, list[float]]:
    """Mini-batch gradient descent; returns params and the per-epoch train loss."""
    Y = one_hot(y)
    if params is None:
        params = init_params(X.shape[1], cfg, rng_for(cfg.seed, "mlp-init"))
    else:
        params = params.copy()
    shuffle_rng = rng_for(cfg.seed, "mlp-shuffle")
    lr = cfg.learning_rate
    n = X.shape[0]
    history = []
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            loss, g = gradients(params, X[idx], Y[idx])
            if not np.isfinite(loss):
                raise NonFiniteLoss(b, epoch)
            params.W1 -= lr * g["W1"]
            params.b1 -= lr * g["b1"]
            params.W2 -= lr * g["W2"]
            params.b2 -= lr * g["b2"]
            params.W3 -= lr * g["W3"]
            params.b3 -= lr * g["b3"]
        history.append(batch_loss(params, X, Y))
    return params, history


def mlp_train(cfg: MlpConfig, train: LabeledDataset) -> MlpParams:
    records = labeled_records(train)
    X = InputEncoder(train.schema).encode(records)
    params, _ = train_arrays(cfg, X, label_indices(records))
    return params


class MlpClassifier(BaseClassifier):
    name = "mlp"

    def __init__(self, cfg: MlpConfig | None = None):
        self.cfg = cfg or MlpConfig()
        self.params: MlpParams | None = None
        self.encoder: InputEncoder | None = None
        self.history: list[float] = []

    def fit(self, train: LabeledDataset, seed: int = 0) -> "MlpClassifier":
        records = labeled_records(train)
        self.encoder = InputEncoder(train.schema)
        cfg = MlpConfig(self.cfg.hidden, self.cfg.learning_rate, self.cfg.epochs,
                        self.cfg.batch_size, seed)
        self.params, self.history = train_arrays(cfg, self.encoder.encode(records),
                                                 label_indices(records))
        return self

    def predict_proba(self, record: PrivacyRecord) -> np.ndarray:
        return self.predict_proba_many([record])[0]

    def predict_proba_many(self, records) -> np.ndarray:
        return mlp_forward(self.params, self.encoder.encode(records))[2]
