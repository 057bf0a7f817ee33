"""k-anonymity by uniform global recoding with bounded suppression."""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..core import MISSING, Feature, FeatureSchema, LabeledDataset, categorical
from ..errors import AnonymizationInfeasible, ConfigInvalid
from .config import PreprocessConfig

SUPPRESSED = "*"
MAX_SUPPRESSION = 0.05


@dataclass(frozen=True)
class NumericLevels:
    """Exact value, then brackets of each width anchored at the feature minimum, then "*"."""

    widths: tuple[float, ...]

    def __post_init__(self):
        prev = None
        for w in self.widths:
            if w <= 0:
                raise ConfigInvalid("bracket widths must be positive")
            if prev is not None and (w <= prev or not math.isclose(w / prev, round(w / prev))):
                raise ConfigInvalid(f"width {w} must be a larger multiple of {prev}")
            prev = w

    @property
    def n_levels(self) -> int:
        return len(self.widths) + 2

    def generalize(self, feature: Feature, value, level: int):
        if level == 0 or value is MISSING:
            return value
        if level == self.n_levels - 1:
            return (feature.min + feature.max) / 2
        w = self.widths[level - 1]
        lo = feature.min + math.floor((value - feature.min) / w) * w
        hi = min(lo + w - 1, feature.max) if feature.integer else min(lo + w, feature.max)
        return (lo + hi) / 2

    def feature_at(self, feature: Feature, level: int) -> Feature:
        return feature

    def to_json(self) -> dict:
        return {"kind": "numeric", "widths": list(self.widths)}


@dataclass(frozen=True)
class CategoricalLevels:
    """Explicit value maps for levels 1..L-2; the top level maps everything to "*"."""

    maps: tuple[Mapping[str, str], ...] = ()

    @property
    def n_levels(self) -> int:
        return len(self.maps) + 2

    def check(self, feature: Feature) -> None:
        prev = {t: t for t in feature.domain}
        for level, mapping in enumerate(self.maps, start=1):
            missing = set(feature.domain) - set(mapping)
            if missing:
                raise ConfigInvalid(f"level {level} of {feature.name!r} misses {sorted(missing)}")
            parent: dict[str, str] = {}
            for t in feature.domain:
                if parent.setdefault(prev[t], mapping[t]) != mapping[t]:
                    raise ConfigInvalid(f"level {level} of {feature.name!r} is not a coarsening")
            prev = mapping

    def generalize(self, feature: Feature, value, level: int):
        if level == 0 or value is MISSING:
            return value
        if level == self.n_levels - 1:
            return SUPPRESSED
        return self.maps[level - 1][value]

    def feature_at(self, feature: Feature, level: int) -> Feature:
        if level == 0:
            return feature
        tokens = sorted({self.generalize(feature, t, level) for t in feature.domain})
        return categorical(feature.name, tokens, quasi_identifier=feature.quasi_identifier,
                           sensitive=feature.sensitive)

    def to_json(self) -> dict:
        return {"kind": "categorical", "levels": [dict(m) for m in self.maps]}


def masking_levels(domain: Sequence[str], depth: int) -> CategoricalLevels:
    """Levels that mask 1..depth trailing characters, e.g. 77001 -> 7700*."""
    maps = []
    for n in range(1, depth + 1):
        maps.append({t: (t[:-n] + "*" if len(t) > n else "*") for t in domain})
    return CategoricalLevels(tuple(maps))


@dataclass(frozen=True)
class GeneralizationHierarchy:
    levels: Mapping[str, NumericLevels | CategoricalLevels] = field(default_factory=dict)

    def for_feature(self, feature: Feature):
        spec = self.levels.get(feature.name)
        if spec is None:
            spec = CategoricalLevels() if feature.is_categorical else NumericLevels(())
        if isinstance(spec, CategoricalLevels):
            if not feature.is_categorical:
                raise ConfigInvalid(f"categorical hierarchy given for numeric {feature.name!r}")
            spec.check(feature)
        elif feature.is_categorical:
            raise ConfigInvalid(f"numeric hierarchy given for categorical {feature.name!r}")
        return spec

    def to_json(self) -> dict:
        return {name: spec.to_json() for name, spec in self.levels.items()}

    @classmethod
    def from_json(cls, d: dict) -> "GeneralizationHierarchy":
        levels = {}
        for name, spec in d.items():
            if spec.get("kind") == "numeric":
                levels[name] = NumericLevels(tuple(float(w) for w in spec.get("widths", ())))
            elif spec.get("kind") == "categorical":
                levels[name] = CategoricalLevels(tuple(spec.get("levels", ())))
            else:
                raise ConfigInvalid(f"hierarchy for {name!r} needs kind numeric|categorical")
        return cls(levels)

    @classmethod
    def load(cls, path) -> "GeneralizationHierarchy":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def default_hierarchy() -> GeneralizationHierarchy:
    return GeneralizationHierarchy({"hour_of_day": NumericLevels((4.0, 12.0))})


def candidate_levels(n_levels: Sequence[int]) -> list[tuple[int, ...]]:
    """All level vectors ordered by total generalization, then lexicographically."""
    vectors = itertools.product(*(range(n) for n in n_levels))
    return sorted(vectors, key=lambda v: (sum(v), v))


def _qi_tuples(ds: LabeledDataset, qis, specs, vector) -> list[tuple]:
    feats = ds.schema.features
    return [tuple(spec.generalize(feats[j], r.values[j], lvl)
                  for j, spec, lvl in zip(qis, specs, vector))
            for r in ds.records]


def k_anonymize(ds: LabeledDataset, hierarchy: GeneralizationHierarchy,
                cfg: PreprocessConfig) -> tuple[LabeledDataset, int]:
    """Generalize quasi-identifiers to the least uniform level vector meeting k.

    Records left in equivalence classes smaller than ``cfg.anonymity_k`` are
    suppressed; a level vector is acceptable only if that removes at most 5%
    of the input. Returns the anonymized dataset and the suppressed count.
    """
    qis = ds.schema.quasi_identifiers
    if not qis:
        raise ConfigInvalid("schema declares no quasi-identifier")
    feats = ds.schema.features
    specs = [hierarchy.for_feature(feats[j]) for j in qis]
    k = cfg.anonymity_k
    n = len(ds)
    for vector in candidate_levels([s.n_levels for s in specs]):
        keys = _qi_tuples(ds, qis, specs, vector)
        sizes = Counter(keys)
        small = [i for i, key in enumerate(keys) if sizes[key] < k]
        if len(small) * 20 > n:  # more than 5% suppressed
            continue
        if not any(vector) and not small:
            return ds, 0
        dropped = set(small)
        schema = ds.schema
        for j, spec, lvl in zip(qis, specs, vector):
            schema = schema.with_feature(j, spec.feature_at(feats[j], lvl))
        records = []
        for i, r in enumerate(ds.records):
            if i in dropped:
                continue
            values = list(r.values)
            for j, g in zip(qis, keys[i]):
                values[j] = g
            records.append(r.with_values(values))
        tag = ",".join(str(v) for v in vector)
        return (LabeledDataset(schema, tuple(records), f"{ds.provenance}+k{k}[{tag}]",
                               validate=False), len(dropped))
    raise AnonymizationInfeasible(
        f"k={k} cannot be met with <= {MAX_SUPPRESSION:.0%} suppression even at the top level")


def chosen_levels(ds: LabeledDataset, hierarchy: GeneralizationHierarchy,
                  cfg: PreprocessConfig) -> tuple[int, ...]:
    """The level vector ``k_anonymize`` would apply (for provenance reports)."""
    qis = ds.schema.quasi_identifiers
    feats = ds.schema.features
    specs = [hierarchy.for_feature(feats[j]) for j in qis]
    for vector in candidate_levels([s.n_levels for s in specs]):
        sizes = Counter(_qi_tuples(ds, qis, specs, vector))
        if sum(c for c in sizes.values() if c < cfg.anonymity_k) * 20 <= len(ds):
            return vector
    raise AnonymizationInfeasible(f"k={cfg.anonymity_k} infeasible")
