"""Fitted-model documents: kind tag, schema digest and format version around each model's state."""

from __future__ import annotations

import json
from dataclasses import asdict

from .core import FeatureSchema
from .errors import ConfigInvalid, ParseError, SchemaMismatch
from .models import InputEncoder, MlpClassifier, MlpConfig, MlpParams, NaiveBayesClassifier, NbModel
from .models import RuleClassifier, RuleTable
from .rl import QPolicyClassifier, QTable
from .envstate import StateSpace

FORMAT_VERSION = 1


def model_to_json(model, schema: FeatureSchema) -> dict:
    if isinstance(model, NaiveBayesClassifier):
        state = model.model.to_json()
    elif isinstance(model, MlpClassifier):
        state = {"config": asdict(model.cfg), "params": model.params.to_json()}
    elif isinstance(model, QPolicyClassifier):
        state = {"q": model.q.to_json()}
    elif isinstance(model, RuleClassifier):
        state = model.rules.to_json()
    else:
        raise ConfigInvalid(f"cannot serialize {type(model).__name__}")
    return {"kind": model.name, "version": FORMAT_VERSION, "schema_digest": schema.digest(),
            "schema": schema.to_json(), "state": state}


def model_from_json(doc: dict, schema: FeatureSchema | None = None):
    """Rebuild a fitted classifier; ``schema``, when given, must match the stored digest."""
    try:
        kind, state = doc["kind"], doc["state"]
        stored = FeatureSchema.from_json(doc["schema"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed model document: missing {exc}") from None
    if doc.get("version") != FORMAT_VERSION:
        raise ParseError(f"unsupported model format version {doc.get('version')!r}")
    if stored.digest() != doc.get("schema_digest"):
        raise SchemaMismatch("model schema digest does not match its embedded schema")
    if schema is not None and schema.digest() != stored.digest():
        raise SchemaMismatch("model was trained on a different schema")
    if kind == "nb":
        m = NaiveBayesClassifier(float(state["smoothing"]))
        m.model = NbModel.from_json(stored, state)
    elif kind == "mlp":
        cfg = state["config"]
        m = MlpClassifier(MlpConfig(tuple(cfg["hidden"]), cfg["learning_rate"], cfg["epochs"],
                                    cfg["batch_size"], cfg["seed"]))
        m.params = MlpParams.from_json(state["params"])
        m.encoder = InputEncoder(stored)
    elif kind == "q":
        m = QPolicyClassifier(q=QTable.from_json(state["q"], StateSpace.from_schema(stored)),
                              schema=stored)
    elif kind == "rule":
        m = RuleClassifier(RuleTable.from_json(state))
        m.schema = stored
    else:
        raise ParseError(f"unknown model kind {kind!r}")
    return m


def save_model(model, schema: FeatureSchema, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model, schema), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path: str, schema: FeatureSchema | None = None):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    return model_from_json(doc, schema)
