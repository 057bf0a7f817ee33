"""Persona-mixture simulator for privacy-decision data and RL transitions.

Each persona is a latent user archetype with per-(context, permission)
propensities over Allow/Deny/Ask and its own feature distributions.
A dataset is a seeded draw from the persona mixture; every record uses its
own random stream derived from ``(master_seed, record index)``, which makes
``generate`` prefix-stable: the first ``n`` records of a larger volume equal
a volume-``n`` generation.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np

from .core import (CLASSES, MISSING, N_CLASSES, FeatureSchema, LabeledDataset, PrivacyChoice,
                   PrivacyRecord, canonical_number, categorical, numeric)
from .envstate import CONTEXT, DENIALS, PERMISSION, Action, EnvState, denial_bucket
from .errors import ConfigInvalid

PROB_TOL = 1e-9
MAX_RATE = 0.3


@dataclass(frozen=True)
class Persona:
    persona_id: int
    name: str
    context_propensities: Mapping[tuple[str, str], tuple[float, float, float]]
    feature_distributions: Mapping[str, Mapping[str, Any]]
    default_propensity: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    drift: float = 0.0

    def propensity(self, context: str, permission: str) -> np.ndarray:
        vec = self.context_propensities.get((context, permission), self.default_propensity)
        return np.asarray(vec, dtype=float)

    def preferred(self, context: str, permission: str) -> PrivacyChoice:
        """Most likely choice for a request; ties resolve Allow < Deny < Ask."""
        return CLASSES[int(np.argmax(self.propensity(context, permission)))]

    def validate(self, schema: FeatureSchema) -> None:
        vectors = list(self.context_propensities.values()) + [self.default_propensity]
        for vec in vectors:
            if len(vec) != N_CLASSES or min(vec) < 0 or abs(sum(vec) - 1) > PROB_TOL:
                raise ConfigInvalid(f"persona {self.name}: bad propensity vector {vec}")
        if not 0 <= self.drift <= 0.5:
            raise ConfigInvalid(f"persona {self.name}: drift {self.drift} outside [0, 0.5]")
        ctx, perm = schema[CONTEXT].domain, schema[PERMISSION].domain
        for c, p in self.context_propensities:
            if c not in ctx or p not in perm:
                raise ConfigInvalid(f"persona {self.name}: unknown pair ({c}, {p})")
        for f in schema:
            dist = self.feature_distributions.get(f.name)
            if dist is None:
                continue
            if f.is_categorical:
                w = dist.get("weights", {})
                if set(w) - set(f.domain) or not w or min(w.values()) < 0 or sum(w.values()) <= 0:
                    raise ConfigInvalid(f"persona {self.name}: bad weights for {f.name}")
            elif dist.get("spread", 0) < 0:
                raise ConfigInvalid(f"persona {self.name}: negative spread for {f.name}")

    def to_json(self) -> dict:
        return {
            "persona_id": self.persona_id,
            "name": self.name,
            "context_propensities": {f"{c}|{p}": list(v)
                                     for (c, p), v in self.context_propensities.items()},
            "default_propensity": list(self.default_propensity),
            "feature_distributions": {k: dict(v) for k, v in self.feature_distributions.items()},
            "drift": self.drift,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Persona":
        props = {}
        for key, vec in d.get("context_propensities", {}).items():
            c, p = key.split("|")
            props[(c, p)] = tuple(float(x) for x in vec)
        return cls(
            persona_id=int(d["persona_id"]),
            name=d.get("name", f"persona-{d['persona_id']}"),
            context_propensities=props,
            feature_distributions=d.get("feature_distributions", {}),
            default_propensity=tuple(d.get("default_propensity", (1 / 3, 1 / 3, 1 / 3))),
            drift=float(d.get("drift", 0.0)),
        )


@dataclass(frozen=True)
class GeneratorConfig:
    schema: FeatureSchema
    personas: tuple[Persona, ...]
    mixture_weights: tuple[float, ...]
    volume: int = 10_000
    label_noise: float = 0.05
    missing_rate: float = 0.03
    duplicate_rate: float = 0.02
    master_seed: int = 42

    def validate(self) -> None:
        if not self.personas:
            raise ConfigInvalid("at least one persona is required")
        w = self.mixture_weights
        if len(w) != len(self.personas) or min(w) < 0 or abs(sum(w) - 1) > PROB_TOL:
            raise ConfigInvalid(f"mixture_weights {w} must be a probability vector "
                                f"of length {len(self.personas)}")
        for name in ("label_noise", "missing_rate", "duplicate_rate"):
            rate = getattr(self, name)
            if not 0 <= rate <= MAX_RATE:
                raise ConfigInvalid(f"{name}={rate} outside [0, {MAX_RATE}]")
        if self.volume < 1:
            raise ConfigInvalid("volume must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigInvalid("master_seed must be a 64-bit unsigned integer")
        names = self.schema.names
        for required in (CONTEXT, PERMISSION):
            if required not in names or not self.schema[required].is_categorical:
                raise ConfigInvalid(f"schema needs a categorical feature {required!r}")
        if len({p.persona_id for p in self.personas}) != len(self.personas):
            raise ConfigInvalid("persona ids must be unique")
        for p in self.personas:
            p.validate(self.schema)

    def with_(self, **changes) -> "GeneratorConfig":
        return replace(self, **changes)

    def to_json(self) -> dict:
        return {
            "schema": self.schema.to_json(),
            "personas": [p.to_json() for p in self.personas],
            "mixture_weights": list(self.mixture_weights),
            "volume": self.volume,
            "label_noise": self.label_noise,
            "missing_rate": self.missing_rate,
            "duplicate_rate": self.duplicate_rate,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_json(cls, d: dict) -> "GeneratorConfig":
        try:
            cfg = cls(
                schema=FeatureSchema.from_json(d["schema"]),
                personas=tuple(Persona.from_json(p) for p in d["personas"]),
                mixture_weights=tuple(float(x) for x in d["mixture_weights"]),
                volume=int(d.get("volume", 10_000)),
                label_noise=float(d.get("label_noise", 0.05)),
                missing_rate=float(d.get("missing_rate", 0.03)),
                duplicate_rate=float(d.get("duplicate_rate", 0.02)),
                master_seed=int(d.get("master_seed", 42)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"malformed generator config: {exc}") from None
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "GeneratorConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# shipped benchmark configuration

CONTEXTS = ("social", "ecommerce", "assistant", "finance", "health")
PERMISSIONS = ("camera", "microphone", "location", "contacts", "storage")


def default_schema() -> FeatureSchema:
    return FeatureSchema((
        categorical(CONTEXT, CONTEXTS),
        categorical(PERMISSION, PERMISSIONS),
        numeric("hour_of_day", 0, 23, unit="hour",
                quasi_identifier=True, sensitive=True),
        numeric(DENIALS, 0, 20, unit="count", integer=True),
    ))


def _vec(choice: str, strength: float) -> tuple[float, float, float]:
    rest = (1.0 - strength) / 2
    out = [rest] * 3
    out[{"A": 0, "D": 1, "K": 2}[choice]] = strength
    return tuple(out)


def _table(rows: Mapping[str, str], strength: float) -> dict:
    """Build propensities from one letter per permission (A=Allow, D=Deny, K=Ask)."""
    table = {}
    for ctx, letters in rows.items():
        for perm, letter in zip(PERMISSIONS, letters):
            table[(ctx, perm)] = _vec(letter, strength)
    return table


def _uniform_weights(domain) -> dict:
    return {"weights": {t: 1.0 for t in domain}}


def default_personas() -> tuple[Persona, ...]:
    hours = {"mean": 14.0, "spread": 5.0}
    ctx_uniform = _uniform_weights(CONTEXTS)
    perm_uniform = _uniform_weights(PERMISSIONS)
    # permission columns: camera, microphone, location, contacts, storage
    return (
        Persona(0, "privacy-maximalist",
                _table({"social": "DDDDD", "ecommerce": "DDDDK", "assistant": "DKDDD",
                        "finance": "DDDDD", "health": "KDDDD"}, 0.85),
                {CONTEXT: ctx_uniform, PERMISSION: perm_uniform,
                 "hour_of_day": hours, DENIALS: {"mean": 7.5, "spread": 1.5}}),
        Persona(1, "convenience-first",
                _table({"social": "AAAAA", "ecommerce": "AAAAA", "assistant": "AAAAA",
                        "finance": "AAKAA", "health": "AAKAA"}, 0.85),
                {CONTEXT: ctx_uniform, PERMISSION: perm_uniform,
                 "hour_of_day": hours, DENIALS: {"mean": 0.0, "spread": 0.3}}),
        Persona(2, "context-sensitive",
                _table({"social": "AADAK", "ecommerce": "DDADA", "assistant": "KAAAD",
                        "finance": "ADDDK", "health": "KKDDA"}, 0.85),
                {CONTEXT: ctx_uniform, PERMISSION: perm_uniform,
                 "hour_of_day": hours, DENIALS: {"mean": 2.0, "spread": 0.7}}),
        Persona(3, "finance-guarded",
                _table({"social": "AAKAA", "ecommerce": "AAKAA", "assistant": "AAKAA",
                        "finance": "DDDDD", "health": "KKKKK"}, 0.85),
                {CONTEXT: {"weights": {"social": 1, "ecommerce": 2, "assistant": 1,
                                       "finance": 3, "health": 1}},
                 PERMISSION: perm_uniform,
                 "hour_of_day": hours, DENIALS: {"mean": 7.5, "spread": 1.5}}),
        Persona(4, "social-sharer",
                _table({"social": "AAAAA", "ecommerce": "AAKKA", "assistant": "AAKKA",
                        "finance": "AAKKA", "health": "AAKKA"}, 0.85),
                {CONTEXT: {"weights": {"social": 4, "ecommerce": 1, "assistant": 1,
                                       "finance": 1, "health": 1}},
                 PERMISSION: perm_uniform,
                 "hour_of_day": hours, DENIALS: {"mean": 0.0, "spread": 0.3}}),
        Persona(5, "ambivalent", {}, {
            CONTEXT: ctx_uniform, PERMISSION: perm_uniform,
            "hour_of_day": hours, DENIALS: {"mean": 2.0, "spread": 0.7}},
            default_propensity=(0.2, 0.2, 0.6), drift=0.1),
    )


def default_config() -> GeneratorConfig:
    cfg = GeneratorConfig(
        schema=default_schema(),
        personas=default_personas(),
        mixture_weights=(0.16, 0.2, 0.18, 0.14, 0.17, 0.15),
        volume=10_000,
        label_noise=0.05,
        missing_rate=0.03,
        duplicate_rate=0.02,
        master_seed=42,
    )
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# dataset generation


def _record_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _cdf(p) -> list[float]:
    c = np.cumsum(np.asarray(p, dtype=float))
    c /= c[-1]
    return c.tolist()


def _pick(cdf: list[float], u: float) -> int:
    return min(bisect.bisect_right(cdf, u), len(cdf) - 1)


class _Sampler:
    """Pre-resolved distributions so per-record sampling is cheap."""

    def __init__(self, cfg: GeneratorConfig):
        self.cfg = cfg
        self.schema = cfg.schema
        self.mixture = _cdf(cfg.mixture_weights)
        self.ctx_i = self.schema.index(CONTEXT)
        self.perm_i = self.schema.index(PERMISSION)
        self.features = []
        for persona in cfg.personas:
            dists = []
            for f in self.schema:
                d = persona.feature_distributions.get(f.name, {})
                if f.is_categorical:
                    w = d.get("weights") or {t: 1.0 for t in f.domain}
                    p = np.array([float(w.get(t, 0.0)) for t in f.domain])
                    dists.append(("cat", f.domain, _cdf(p)))
                else:
                    mean = float(d.get("mean", (f.min + f.max) / 2))
                    spread = float(d.get("spread", f.span / 4))
                    dists.append(("num", f, mean, spread))
            self.features.append(dists)

    def draw_features(self, rng: np.random.Generator, persona_idx: int) -> list:
        values = []
        for dist in self.features[persona_idx]:
            if dist[0] == "cat":
                _, domain, cdf = dist
                values.append(domain[_pick(cdf, rng.random())])
            else:
                _, f, mean, spread = dist
                x = min(max(rng.normal(mean, spread), f.min), f.max)
                values.append(float(round(x)) if f.integer else canonical_number(x))
        return values


def _draw_label(rng: np.random.Generator, propensity: np.ndarray, noise: float) -> int:
    label = _pick(_cdf(propensity), rng.random())
    if rng.random() < noise:
        label = (label + 1 + int(rng.integers(N_CLASSES - 1))) % N_CLASSES
    return label


def generate(config: GeneratorConfig) -> LabeledDataset:
    """Draw ``config.volume`` records from the persona mixture.

    Duplicates occupy slots inside the volume: record ``i`` is, with
    probability ``duplicate_rate``, an exact copy (new id) of a uniformly
    chosen earlier record.
    """
    config.validate()
    sampler = _Sampler(config)
    n_features = len(config.schema)
    records: list[PrivacyRecord] = []
    for i in range(config.volume):
        rng = _record_rng(config.master_seed, i)
        if rng.random() < config.duplicate_rate and i > 0:
            src = records[int(rng.integers(i))]
            records.append(PrivacyRecord(i, src.values, src.label, src.persona_id))
            continue
        p_idx = _pick(sampler.mixture, rng.random())
        persona = config.personas[p_idx]
        values = sampler.draw_features(rng, p_idx)
        prop = persona.propensity(values[sampler.ctx_i], values[sampler.perm_i])
        label = CLASSES[_draw_label(rng, prop, config.label_noise)]
        miss = rng.random(n_features) < config.missing_rate
        values = [MISSING if m else v for v, m in zip(values, miss)]
        records.append(PrivacyRecord(i, tuple(values), label, persona.persona_id))
    return LabeledDataset(config.schema, tuple(records), "simulated-privacy")


def expected_label_marginals(config: GeneratorConfig) -> np.ndarray:
    """Label distribution implied by the mixture, propensities and noise."""
    sampler = _Sampler(config)
    out = np.zeros(N_CLASSES)
    eta = config.label_noise
    for w, persona, dists in zip(config.mixture_weights, config.personas, sampler.features):
        _, ctx_domain, c_ctx = dists[sampler.ctx_i]
        _, perm_domain, c_perm = dists[sampler.perm_i]
        p_ctx = np.diff(c_ctx, prepend=0.0)
        p_perm = np.diff(c_perm, prepend=0.0)
        for c, pc in zip(ctx_domain, p_ctx):
            for q, pq in zip(perm_domain, p_perm):
                prop = persona.propensity(c, q)
                noisy = (1 - eta) * prop + eta * (1 - prop) / (N_CLASSES - 1)
                out += w * pc * pq * noisy
    return out


# ---------------------------------------------------------------------------
# RL transitions


def _pair_sampler(persona: Persona, schema: FeatureSchema):
    sampler_dists = {}
    for name in (CONTEXT, PERMISSION):
        f = schema[name]
        w = persona.feature_distributions.get(name, {}).get("weights") or {t: 1.0 for t in f.domain}
        p = np.array([float(w.get(t, 0.0)) for t in f.domain])
        sampler_dists[name] = (f.domain, p / p.sum())
    return sampler_dists


def draw_request(persona: Persona, schema: FeatureSchema, rng: np.random.Generator,
                 bucket: str) -> EnvState:
    """A fresh permission request with a uniformly drawn current setting."""
    dists = _pair_sampler(persona, schema)
    ctx_dom, ctx_p = dists[CONTEXT]
    perm_dom, perm_p = dists[PERMISSION]
    ctx = ctx_dom[_pick(_cdf(ctx_p), rng.random())]
    perm = perm_dom[_pick(_cdf(perm_p), rng.random())]
    current = CLASSES[int(rng.integers(N_CLASSES))]
    return EnvState(ctx, perm, current, bucket)


def draw_denial_bucket(persona: Persona, schema: FeatureSchema, rng: np.random.Generator) -> str:
    f = schema[DENIALS]
    d = persona.feature_distributions.get(DENIALS, {})
    mean = float(d.get("mean", (f.min + f.max) / 2))
    spread = float(d.get("spread", f.span / 4))
    x = min(max(rng.normal(mean, spread), f.min), f.max)
    return denial_bucket(round(x))


def request_reward(persona: Persona, state: EnvState, action: Action,
                   rng: np.random.Generator) -> float:
    """+1 if the setting left by ``action`` matches the user's choice, else -1.

    The choice is drawn from the persona's propensity for the request and,
    with probability ``persona.drift``, flipped to a uniform other choice.
    """
    pref = _pick(_cdf(persona.propensity(state.context, state.permission)), rng.random())
    if persona.drift > 0 and rng.random() < persona.drift:
        pref = (pref + 1 + int(rng.integers(N_CLASSES - 1))) % N_CLASSES
    setting = action.apply(state.current_setting)
    return 1.0 if setting.index == pref else -1.0


def sample_transition(persona: Persona, state: EnvState, action: Action,
                      rng: np.random.Generator, schema: FeatureSchema | None = None
                      ) -> tuple[EnvState, float]:
    """Reward ``action`` on the current request, then draw the persona's next request."""
    schema = schema or default_schema()
    reward = request_reward(persona, state, action, rng)
    return draw_request(persona, schema, rng, state.denial_bucket), reward


def uniform_policy_match_probability(persona: Persona, schema: FeatureSchema | None = None) -> float:
    """Closed-form P(reward = +1) per step under the uniform-random policy.

    Averages over the persona's request distribution and a uniform current
    setting; drift is folded into the preference distribution.
    """
    schema = schema or default_schema()
    dists = _pair_sampler(persona, schema)
    ctx_dom, ctx_p = dists[CONTEXT]
    perm_dom, perm_p = dists[PERMISSION]
    total = 0.0
    for c, pc in zip(ctx_dom, ctx_p):
        for q, pq in zip(perm_dom, perm_p):
            prop = persona.propensity(c, q)
            pref = (1 - persona.drift) * prop + persona.drift * (1 - prop) / (N_CLASSES - 1)
            match = 0.0
            for action in Action:
                for cur in CLASSES:
                    match += pref[action.apply(cur).index] / (len(Action) * N_CLASSES)
            total += pc * pq * match
    return total
