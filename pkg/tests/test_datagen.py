import math

import numpy as np
import pytest

from privpref.core import CLASSES, MISSING, PrivacyChoice
from privpref.datagen import (GeneratorConfig, Persona, default_config, default_schema, draw_request,
                              expected_label_marginals, generate, sample_transition,
                              uniform_policy_match_probability)
from privpref.envstate import Action, EnvState
from privpref.errors import ConfigInvalid
from privpref.seeding import rng_for

from oracles import binomial_sigma


def _one_persona_config(**kw):
    p = Persona(0, "yes", {}, {}, default_propensity=(1.0, 0.0, 0.0))
    base = dict(schema=default_schema(), personas=(p,), mixture_weights=(1.0,), volume=1,
                label_noise=0.0, missing_rate=0.0, duplicate_rate=0.0, master_seed=7)
    base.update(kw)
    return GeneratorConfig(**base)


def test_default_config_shape():
    cfg = default_config()
    assert cfg.volume == 10_000
    assert math.isclose(sum(cfg.mixture_weights), 1.0)
    assert [p.name for p in cfg.personas] == ["privacy-maximalist", "convenience-first",
                                              "context-sensitive", "finance-guarded",
                                              "social-sharer", "ambivalent"]
    ctx = cfg.schema["context"].domain
    for c in ("social", "ecommerce", "assistant"):
        assert c in ctx
    assert (cfg.label_noise, cfg.missing_rate, cfg.duplicate_rate, cfg.master_seed) == (0.05, 0.03, 0.02, 42)
    assert len(generate(cfg.with_(volume=25))) == 25


def test_degenerate_mixture_gives_single_allow():
    ds = generate(_one_persona_config())
    assert len(ds) == 1
    assert ds.records[0].label is PrivacyChoice.ALLOW


def test_generation_is_deterministic():
    cfg = default_config().with_(volume=500)
    assert generate(cfg).records == generate(cfg).records
    assert generate(cfg).records != generate(cfg.with_(master_seed=43)).records


def test_prefix_property():
    cfg = default_config().with_(volume=600)
    big = generate(cfg)
    small = generate(cfg.with_(volume=200))
    assert big.records[:200] == small.records


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        _one_persona_config(mixture_weights=(0.5,)).validate()
    with pytest.raises(ConfigInvalid):
        generate(_one_persona_config(label_noise=0.31))
    with pytest.raises(ConfigInvalid):
        generate(_one_persona_config(volume=0))
    bad = Persona(0, "bad", {}, {}, default_propensity=(0.5, 0.6, -0.1))
    with pytest.raises(ConfigInvalid):
        generate(_one_persona_config(personas=(bad,)))
    drifty = Persona(0, "drift", {}, {}, drift=0.6)
    with pytest.raises(ConfigInvalid):
        generate(_one_persona_config(personas=(drifty,)))


def test_config_json_round_trip():
    cfg = default_config()
    again = GeneratorConfig.from_json(cfg.to_json())
    assert again.to_json() == cfg.to_json()
    assert generate(again.with_(volume=50)).records == generate(cfg.with_(volume=50)).records


def _mixture_marginals(cfg):
    """Independent oracle: sum propensities over each persona's request distribution."""
    total = np.zeros(3)
    for w, p in zip(cfg.mixture_weights, cfg.personas):
        def dist(name):
            dom = cfg.schema[name].domain
            weights = p.feature_distributions.get(name, {}).get("weights") or {t: 1 for t in dom}
            vec = np.array([float(weights.get(t, 0)) for t in dom])
            return dict(zip(dom, vec / vec.sum()))
        for c, pc in dist("context").items():
            for q, pq in dist("permission").items():
                total += w * pc * pq * np.asarray(p.propensity(c, q))
    eta = cfg.label_noise
    return (1 - eta) * total + eta * (1 - total) / 2


def test_label_marginals_within_three_sigma():
    cfg = default_config().with_(volume=20_000)
    expected = _mixture_marginals(cfg)
    assert np.allclose(expected, expected_label_marginals(cfg), atol=1e-12)
    counts = generate(cfg).label_counts()
    n = cfg.volume
    for c in CLASSES:
        p = expected[c.index]
        assert abs(counts[c] - n * p) <= 3 * binomial_sigma(n, p), c


def test_missing_rate_and_duplicates(default_ds_2k):
    ds = default_ds_2k
    cells = [v for r in ds.records for v in r.values]
    rate = sum(v is MISSING for v in cells) / len(cells)
    assert abs(rate - 0.03) < 4 * math.sqrt(0.03 * 0.97 / len(cells)) + 0.003
    assert all(r.label is not MISSING for r in ds.records)


def test_sample_transition_rewards():
    p = Persona(0, "denier", {}, {}, default_propensity=(0.0, 1.0, 0.0))
    schema = default_schema()
    rng = rng_for(1, "t")
    s = EnvState("social", "camera", PrivacyChoice.ALLOW, "0")
    _, r = sample_transition(p, s, Action.SET_DENY, rng, schema)
    assert r == 1.0
    _, r = sample_transition(p, s, Action.RETAIN, rng, schema)
    assert r == -1.0


def test_uniform_policy_mean_reward():
    # under a uniform action, the resulting setting is uniform over the 3 choices
    # whatever the preference: match probability is exactly 1/3
    cfg = default_config()
    persona = cfg.personas[2]
    assert math.isclose(uniform_policy_match_probability(persona, cfg.schema), 1 / 3)
    rng = rng_for(5, "uniform")
    state = draw_request(persona, cfg.schema, rng, "1-3")
    n, wins = 10_000, 0
    for _ in range(n):
        action = list(Action)[int(rng.integers(4))]
        state, r = sample_transition(persona, state, action, rng, cfg.schema)
        wins += r > 0
    assert abs(wins - n / 3) <= 3 * binomial_sigma(n, 1 / 3)
