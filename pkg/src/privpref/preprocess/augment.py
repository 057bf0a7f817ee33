from __future__ import annotations

import numpy as np

from ..core import CLASSES, MISSING, LabeledDataset, PrivacyRecord
from ..errors import ConfigInvalid, EmptyClass
from .config import PreprocessConfig

RESAMPLE_PROB = 0.3
JITTER = 0.05


def augment_oversample(ds: LabeledDataset, cfg: PreprocessConfig) -> LabeledDataset:
    """Top up every class below its target count with jittered pseudo-records.

    A pseudo-record copies a random class member, swaps each categorical
    value for a random same-class donor's value with probability 0.3, and
    shifts numerics by up to 5% of the feature range.
    """
    targets = cfg.targets()
    if not targets:
        raise ConfigInvalid("augment_target is not set")
    feats = ds.schema.features
    members = {c: [r for r in ds.records if r.label is c] for c in CLASSES}
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0xA06,)))
    next_id = max((r.record_id for r in ds.records), default=-1) + 1
    first_new = next_id
    added = []
    for c in CLASSES:
        need = targets.get(c, 0) - len(members[c])
        if need <= 0:
            continue
        pool = members[c]
        if not pool:
            raise EmptyClass(f"class {c.token} has no members to augment from")
        for _ in range(need):
            base = pool[int(rng.integers(len(pool)))]
            values = list(base.values)
            for j, f in enumerate(feats):
                if values[j] is MISSING:
                    continue
                if f.is_categorical:
                    if rng.random() < RESAMPLE_PROB:
                        donor = pool[int(rng.integers(len(pool)))].values[j]
                        if donor is not MISSING:
                            values[j] = donor
                else:
                    shifted = values[j] + rng.uniform(-JITTER, JITTER) * f.span
                    values[j] = min(max(shifted, f.min), f.max)
            added.append(PrivacyRecord(next_id, tuple(values), c, None))
            next_id += 1
    if not added:
        return ds
    provenance = f"{ds.provenance}+augmented[{first_new}-{next_id - 1}]"
    return LabeledDataset(ds.schema, ds.records + tuple(added), provenance, validate=False)
