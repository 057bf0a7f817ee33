from __future__ import annotations

from ..core import LabeledDataset


def deduplicate(ds: LabeledDataset) -> LabeledDataset:
    """Keep the first record of every (feature values, label) group, in order.

    ``record_id`` and ``persona_id`` are not part of the key.
    """
    seen = set()
    kept = []
    for r in ds.records:
        key = (r.values, r.label)
        if key in seen:
            continue
        seen.add(key)
        kept.append(r)
    if len(kept) == len(ds):
        return ds
    return LabeledDataset(ds.schema, tuple(kept), ds.provenance, validate=False)
