"""KNN imputation over mixed categorical/numeric features.

Distance between two records is the number of mutually observed categorical
features that differ plus the range-normalised absolute difference of every
mutually observed numeric feature.  Only original values are read, so the
result does not depend on the order in which cells are filled.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from ..core import MISSING, LabeledDataset
from ..errors import InsufficientDonors
from .config import PreprocessConfig


def _encode(ds: LabeledDataset):
    """Columns as arrays: category codes (-1 = missing) or floats (nan = missing)."""
    cols = []
    for j, f in enumerate(ds.schema.features):
        if f.is_categorical:
            lookup = {t: i for i, t in enumerate(f.domain)}
            cols.append(np.array([-1 if r.values[j] is MISSING else lookup[r.values[j]]
                                  for r in ds.records], dtype=np.int64))
        else:
            cols.append(np.array([np.nan if r.values[j] is MISSING else float(r.values[j])
                                  for r in ds.records], dtype=float))
    return cols


def _distances(ds: LabeledDataset, cols, observed, i: int) -> np.ndarray:
    d = np.zeros(len(ds))
    for j, f in enumerate(ds.schema.features):
        if not observed[j][i]:
            continue
        both = observed[j]
        if f.is_categorical:
            d += (both & (cols[j] != cols[j][i])).astype(float)
        else:
            term = np.abs(cols[j] - cols[j][i]) / f.span
            d += np.where(both, term, 0.0)
    return d


def nearest_donors(dist: np.ndarray, record_ids: np.ndarray, donors: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k donors with smallest distance, ties by lower record_id."""
    dd = dist[donors]
    if len(donors) > k:
        kth = np.partition(dd, k - 1)[k - 1]
        keep = dd <= kth
        donors, dd = donors[keep], dd[keep]
    order = np.lexsort((record_ids[donors], dd))
    return donors[order[:k]]


def knn_impute(ds: LabeledDataset, cfg: PreprocessConfig) -> LabeledDataset:
    k = cfg.knn_k
    feats = ds.schema.features
    cols = _encode(ds)
    observed = [c >= 0 if f.is_categorical else ~np.isnan(c) for f, c in zip(feats, cols)]
    if all(o.all() for o in observed):
        return ds
    for f, o in zip(feats, observed):
        if not o.all() and o.sum() < k:
            raise InsufficientDonors(
                f"feature {f.name!r} has {int(o.sum())} donors, need knn_k={k}")
    donor_idx = [np.flatnonzero(o) for o in observed]
    record_ids = np.array([r.record_id for r in ds.records], dtype=np.int64)

    records = list(ds.records)
    for i, r in enumerate(ds.records):
        holes = [j for j, v in enumerate(r.values) if v is MISSING]
        if not holes:
            continue
        dist = _distances(ds, cols, observed, i)
        values = list(r.values)
        for j in holes:
            nbrs = nearest_donors(dist, record_ids, donor_idx[j], k)
            donor_values = [ds.records[n].values[j] for n in nbrs]
            if feats[j].is_categorical:
                counts = Counter(donor_values)
                best = max(counts.values())
                values[j] = min(t for t, c in counts.items() if c == best)
            else:
                total = 0.0
                for v in donor_values:
                    total += v
                values[j] = total / k
        records[i] = r.with_values(values)
    return LabeledDataset(ds.schema, tuple(records), ds.provenance, validate=False)
