"""Data model for privacy-decision records and the canonical CSV format."""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence, Union

from .errors import ParseError, SchemaMismatch, UnknownChoice


class _Missing:
    """Marker for an unobserved cell. Compared by identity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Missing, ())


MISSING = _Missing()

Value = Union[str, float, _Missing]


def is_missing(value: Any) -> bool:
    return value is MISSING


class PrivacyChoice(enum.Enum):
    ALLOW = 1
    DENY = 0
    ASK = -1

    @property
    def code(self) -> int:
        return self.value

    @property
    def token(self) -> str:
        return self.name.title()

    @property
    def index(self) -> int:
        """Position in the fixed class order Allow, Deny, Ask."""
        return _CLASS_INDEX[self]

    @classmethod
    def from_index(cls, i: int) -> "PrivacyChoice":
        return CLASSES[i]

    @classmethod
    def from_code(cls, code: int) -> "PrivacyChoice":
        try:
            return cls(code)
        except ValueError:
            raise UnknownChoice(f"unknown choice code {code!r}") from None


CLASSES: tuple[PrivacyChoice, ...] = (PrivacyChoice.ALLOW, PrivacyChoice.DENY, PrivacyChoice.ASK)
N_CLASSES = len(CLASSES)
_CLASS_INDEX = {c: i for i, c in enumerate(CLASSES)}
_BY_TOKEN = {c.token: c for c in CLASSES}


def encode_choice(token: str) -> int:
    """Map an exact choice token (``Allow``/``Deny``/``Ask``) to its code."""
    try:
        return _BY_TOKEN[token].code
    except (KeyError, TypeError):
        raise UnknownChoice(f"unknown choice token {token!r}") from None


def decode_choice(code: int) -> str:
    return PrivacyChoice.from_code(code).token


def canonical_choice_token(token: str) -> str:
    return token.strip().title()


def parse_choice(token: str) -> PrivacyChoice:
    """Lenient parse: trim and title-case, then match."""
    return PrivacyChoice(encode_choice(canonical_choice_token(token)))


# ---------------------------------------------------------------------------
# schema


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str  # "categorical" | "numeric"
    domain: tuple[str, ...] = ()
    min: float = 0.0
    max: float = 1.0
    unit: str = ""
    integer: bool = False
    quasi_identifier: bool = False
    sensitive: bool = False

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"

    @property
    def span(self) -> float:
        return self.max - self.min

    def to_json(self) -> dict:
        d: dict[str, Any] = {"name": self.name, "kind": self.kind}
        if self.is_categorical:
            d["domain"] = list(self.domain)
        else:
            d.update(min=self.min, max=self.max, unit=self.unit, integer=self.integer)
        d.update(quasi_identifier=self.quasi_identifier, sensitive=self.sensitive)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Feature":
        kind = d["kind"]
        if kind == "categorical":
            return cls(d["name"], kind, domain=tuple(d["domain"]),
                       quasi_identifier=bool(d.get("quasi_identifier", False)),
                       sensitive=bool(d.get("sensitive", False)))
        return cls(d["name"], kind, min=float(d["min"]), max=float(d["max"]),
                   unit=d.get("unit", ""), integer=bool(d.get("integer", False)),
                   quasi_identifier=bool(d.get("quasi_identifier", False)),
                   sensitive=bool(d.get("sensitive", False)))


def categorical(name: str, domain: Iterable[str], **flags: bool) -> Feature:
    return Feature(name, "categorical", domain=tuple(domain), **flags)


def numeric(name: str, lo: float, hi: float, unit: str = "", integer: bool = False,
            **flags: bool) -> Feature:
    return Feature(name, "numeric", min=float(lo), max=float(hi), unit=unit,
                   integer=integer, **flags)


RESERVED_COLUMNS = ("record_id", "persona_id", "label")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaMismatch(f"duplicate feature names in {names}")
        for f in self.features:
            if not f.name.isidentifier() or f.name in RESERVED_COLUMNS:
                raise SchemaMismatch(f"invalid feature name {f.name!r}")
            if f.kind == "categorical":
                if not f.domain or any(not tok for tok in f.domain):
                    raise SchemaMismatch(f"categorical feature {f.name!r} needs a non-empty domain")
                if len(set(f.domain)) != len(f.domain):
                    raise SchemaMismatch(f"duplicate tokens in domain of {f.name!r}")
            elif f.kind == "numeric":
                if not f.min < f.max:
                    raise SchemaMismatch(f"numeric feature {f.name!r} needs min < max")
            else:
                raise SchemaMismatch(f"unknown feature kind {f.kind!r}")

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise KeyError(name)

    def __getitem__(self, name: str) -> Feature:
        return self.features[self.index(name)]

    @property
    def quasi_identifiers(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.features) if f.quasi_identifier)

    @property
    def sensitive(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.features) if f.sensitive)

    def with_feature(self, index: int, feature: Feature) -> "FeatureSchema":
        feats = list(self.features)
        feats[index] = feature
        return FeatureSchema(tuple(feats))

    def to_json(self) -> dict:
        return {"features": [f.to_json() for f in self.features]}

    @classmethod
    def from_json(cls, d: dict) -> "FeatureSchema":
        return cls(tuple(Feature.from_json(f) for f in d["features"]))

    def digest(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def validate_values(self, values: Sequence[Value], row: int | None = None) -> None:
        if len(values) != len(self.features):
            raise SchemaMismatch(
                f"expected {len(self.features)} values, got {len(values)}", row=row)
        for f, v in zip(self.features, values):
            if v is MISSING:
                continue
            if f.is_categorical:
                if v not in f.domain:
                    raise SchemaMismatch(f"token {v!r} not in domain", row=row, column=f.name)
            else:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise SchemaMismatch(f"non-numeric value {v!r}", row=row, column=f.name)
                if not (f.min <= v <= f.max):
                    raise SchemaMismatch(f"value {v!r} outside [{f.min}, {f.max}]",
                                         row=row, column=f.name)


# ---------------------------------------------------------------------------
# records and datasets


@dataclass(frozen=True)
class PrivacyRecord:
    record_id: int
    values: tuple
    label: PrivacyChoice | _Missing = MISSING
    persona_id: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def complete(self) -> bool:
        return all(v is not MISSING for v in self.values)

    def with_values(self, values: Sequence[Value]) -> "PrivacyRecord":
        return replace(self, values=tuple(values))


@dataclass(frozen=True)
class LabeledDataset:
    schema: FeatureSchema
    records: tuple[PrivacyRecord, ...]
    provenance: str = ""
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.validate:
            seen: set[int] = set()
            for row, r in enumerate(self.records):
                if r.record_id in seen:
                    raise SchemaMismatch(f"duplicate record_id {r.record_id}", row=row)
                if r.record_id < 0:
                    raise SchemaMismatch("record_id must be unsigned", row=row)
                seen.add(r.record_id)
                self.schema.validate_values(r.values, row=row)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def derive(self, records: Iterable[PrivacyRecord], provenance: str | None = None,
               schema: FeatureSchema | None = None) -> "LabeledDataset":
        """New dataset sharing this one's schema unless overridden."""
        return LabeledDataset(schema or self.schema, tuple(records),
                              self.provenance if provenance is None else provenance)

    def subset(self, indices: Iterable[int]) -> "LabeledDataset":
        recs = self.records
        return LabeledDataset(self.schema, tuple(recs[i] for i in indices),
                              self.provenance, validate=False)

    def labels(self) -> list[PrivacyChoice]:
        return [r.label for r in self.records]

    def label_counts(self) -> dict[PrivacyChoice, int]:
        counts = {c: 0 for c in CLASSES}
        for r in self.records:
            if r.label is not MISSING:
                counts[r.label] += 1
        return counts

    def column(self, name: str) -> list:
        i = self.schema.index(name)
        return [r.values[i] for r in self.records]


# ---------------------------------------------------------------------------
# canonical CSV


def format_number(x: float) -> str:
    """Up to 6 significant digits; plain notation for |x| in [1e-3, 1e6)."""
    if x == 0:
        return "0"
    s = f"{x:.6g}"
    if "e" in s and 1e-3 <= abs(x) < 1e6:
        s = f"{float(s):.0f}"
    return s


def canonical_number(x: float) -> float:
    return float(format_number(x))


def header_for(schema: FeatureSchema) -> list[str]:
    return ["record_id", *schema.names, "persona_id", "label"]


def _format_cell(feature: Feature, v: Value) -> str:
    if v is MISSING:
        return ""
    if feature.is_categorical:
        return v
    return format_number(float(v))


def dumps_dataset(ds: LabeledDataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header_for(ds.schema))
    feats = ds.schema.features
    for r in ds.records:
        w.writerow([
            str(r.record_id),
            *(_format_cell(f, v) for f, v in zip(feats, r.values)),
            "" if r.persona_id is None else str(r.persona_id),
            "" if r.label is MISSING else r.label.token,
        ])
    return buf.getvalue()


def save_dataset(ds: LabeledDataset, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_dataset(ds))


def _parse_cell(feature: Feature, text: str, row: int) -> Value:
    if text == "":
        return MISSING
    if feature.is_categorical:
        if text not in feature.domain:
            raise SchemaMismatch(f"token {text!r} not in domain", row=row, column=feature.name)
        return text
    try:
        x = float(text)
    except ValueError:
        raise ParseError(f"malformed number {text!r}", row=row, column=feature.name) from None
    if not math.isfinite(x):
        raise ParseError(f"non-finite number {text!r}", row=row, column=feature.name)
    if not feature.min <= x <= feature.max:
        raise SchemaMismatch(f"value {x!r} outside [{feature.min}, {feature.max}]",
                             row=row, column=feature.name)
    return x


def loads_dataset(text: str, schema: FeatureSchema, provenance: str = "") -> LabeledDataset:
    rows = csv.reader(io.StringIO(text))
    try:
        header = next(rows)
    except StopIteration:
        raise SchemaMismatch("empty file: missing header", row=0) from None
    expected = header_for(schema)
    has_persona = header == expected
    if not has_persona and header != [c for c in expected if c != "persona_id"]:
        missing = [c for c in expected if c not in header and c != "persona_id"]
        raise SchemaMismatch(f"header {header} does not match schema; missing {missing}", row=0)
    feats = schema.features
    n = len(feats)
    records = []
    seen: set[int] = set()
    for row_no, row in enumerate(rows, start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise SchemaMismatch(f"expected {len(header)} cells, got {len(row)}", row=row_no)
        try:
            rid = int(row[0])
        except ValueError:
            raise ParseError(f"malformed record_id {row[0]!r}", row=row_no, column="record_id") from None
        if rid < 0 or rid in seen:
            raise SchemaMismatch(f"invalid or duplicate record_id {rid}", row=row_no, column="record_id")
        seen.add(rid)
        values = tuple(_parse_cell(f, t, row_no) for f, t in zip(feats, row[1:1 + n]))
        persona = None
        if has_persona and row[1 + n] != "":
            try:
                persona = int(row[1 + n])
            except ValueError:
                raise ParseError(f"malformed persona_id {row[1 + n]!r}", row=row_no,
                                 column="persona_id") from None
        label_text = row[-1]
        if label_text == "":
            label: PrivacyChoice | _Missing = MISSING
        else:
            try:
                label = parse_choice(label_text)
            except UnknownChoice:
                raise SchemaMismatch(f"unknown label {label_text!r}", row=row_no,
                                     column="label") from None
        records.append(PrivacyRecord(rid, values, label, persona))
    return LabeledDataset(schema, tuple(records), provenance, validate=False)


def load_dataset(path: str | os.PathLike, schema: FeatureSchema, provenance: str = "") -> LabeledDataset:
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    return loads_dataset(text, schema, provenance or os.path.basename(str(path)))
