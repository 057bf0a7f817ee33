"""Seeded, optionally stratified train/val/test splits and K-fold assignment."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import MISSING, LabeledDataset
from ..errors import ConfigInvalid, TooSmall


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.8
    val_frac: float = 0.1
    test_frac: float = 0.1
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        fr = (self.train_frac, self.val_frac, self.test_frac)
        if min(fr) < 0 or abs(sum(fr) - 1) > 1e-9:
            raise ConfigInvalid("split fractions must be non-negative and sum to 1")


def _round(x: float) -> int:
    return int(math.floor(x + 0.5))


def _strata(ds: LabeledDataset) -> list[list[int]]:
    """Record indices grouped by label in class order; unlabeled records last."""
    groups: dict = {}
    for i, r in enumerate(ds.records):
        key = -1 if r.label is MISSING else r.label.index
        groups.setdefault(key, []).append(i)
    return [groups[k] for k in sorted(groups, key=lambda k: (k < 0, k))]


def apportion(sizes: list[int], frac: float, total: int) -> list[int]:
    """Integer shares summing to ``total`` with each within 1 of size*frac.

    Largest-remainder rounding; remainder ties go to the earlier group.
    """
    exact = [s * frac for s in sizes]
    shares = [math.floor(x) for x in exact]
    left = total - sum(shares)
    order = sorted(range(len(sizes)), key=lambda i: (-(exact[i] - shares[i]), i))
    for i in order[:max(left, 0)]:
        shares[i] += 1
    return shares


def make_split(ds: LabeledDataset, spec: SplitSpec = SplitSpec()
               ) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset]:
    n = len(ds)
    if n < 10:
        raise TooSmall(f"need at least 10 records to split, got {n}")
    n_test = _round(n * spec.test_frac)
    n_val = _round(n * spec.val_frac)
    rng = np.random.default_rng(spec.seed)
    groups = _strata(ds) if spec.stratified else [list(range(n))]
    shuffled = [rng.permutation(g).tolist() for g in groups]
    sizes = [len(g) for g in groups]
    test_k = apportion(sizes, spec.test_frac, n_test)
    val_k = apportion(sizes, spec.val_frac, n_val)
    train, val, test = [], [], []
    for g, t, v in zip(shuffled, test_k, val_k):
        test += g[:t]
        val += g[t:t + v]
        train += g[t + v:]
    return ds.subset(sorted(train)), ds.subset(sorted(val)), ds.subset(sorted(test))


def kfold(ds: LabeledDataset, k: int = 5, seed: int = 0, stratified: bool = True) -> list[list[int]]:
    """Validation-fold index lists: every record in exactly one fold.

    Records are dealt round-robin after a per-class shuffle, so fold sizes
    differ by at most one and each class is spread evenly.
    """
    n = len(ds)
    if k < 2 or n < k:
        raise TooSmall(f"need k >= 2 and at least k records (n={n}, k={k})")
    rng = np.random.default_rng(seed)
    groups = _strata(ds) if stratified else [list(range(n))]
    dealt = [i for g in groups for i in rng.permutation(g).tolist()]
    folds: list[list[int]] = [[] for _ in range(k)]
    for pos, i in enumerate(dealt):
        folds[pos % k].append(i)
    return [sorted(f) for f in folds]


def complement(n: int, fold: list[int]) -> list[int]:
    held = set(fold)
    return [i for i in range(n) if i not in held]
