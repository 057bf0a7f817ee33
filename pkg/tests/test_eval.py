import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privpref.core import CLASSES, FeatureSchema, LabeledDataset, PrivacyRecord, categorical
from privpref.errors import ConfigInvalid, LengthMismatch, TooSmall
from privpref.evaluation import (MetricsReport, SplitSpec, SweepConfig, compute_metrics, kfold, make_split,
                                 metrics_from_confusion, run_sweep)
from privpref.rl import RlConfig
from privpref.evaluation.report import common_digest, fig3_rows, fig4_rows

from conftest import A, D, K

SCHEMA = FeatureSchema((categorical("context", ["social"]),))


def _labeled(counts, seed=0):
    """Dataset with the given per-class counts, labels shuffled into random order."""
    labels = [c for c, n in zip(CLASSES, counts) for _ in range(n)]
    order = np.random.default_rng(seed).permutation(len(labels))
    recs = tuple(PrivacyRecord(i, ("social",), labels[j]) for i, j in enumerate(order))
    return LabeledDataset(SCHEMA, recs, validate=False)


def _ids(ds):
    return [r.record_id for r in ds.records]


def _class_count(ds, c):
    return sum(r.label is c for r in ds.records)


counts_strategy = st.tuples(st.integers(0, 3000), st.integers(0, 1500), st.integers(0, 500)).filter(
    lambda t: 10 <= sum(t) <= 5000)


# --- make_split -------------------------------------------------------------

def test_split_5000():
    train, val, test = make_split(_labeled((2500, 1500, 1000)), SplitSpec(seed=1))
    assert (len(train), len(val), len(test)) == (4000, 500, 500)


@settings(max_examples=100)
@given(counts_strategy, st.integers(0, 2**32 - 1), st.booleans())
def test_split_partition_properties(counts, seed, stratified):
    ds = _labeled(counts, seed)
    n = len(ds)
    train, val, test = make_split(ds, SplitSpec(seed=seed, stratified=stratified))
    a, b, c = set(_ids(train)), set(_ids(val)), set(_ids(test))
    assert not (a & b or a & c or b & c)
    assert a | b | c == set(_ids(ds))
    assert len(test) == math.floor(n * 0.1 + 0.5) and len(val) == math.floor(n * 0.1 + 0.5)
    if stratified:
        for cls in CLASSES:
            size = _class_count(ds, cls)
            assert abs(_class_count(test, cls) - size * 0.1) <= 1
            assert abs(_class_count(val, cls) - size * 0.1) <= 1
    assert make_split(ds, SplitSpec(seed=seed, stratified=stratified))[2].records == test.records


def test_split_imbalanced_keeps_test_share():
    ds = _labeled((900, 90, 10))
    _, _, test = make_split(ds, SplitSpec(seed=3))
    for cls, size in zip(CLASSES, (900, 90, 10)):
        assert abs(_class_count(test, cls) - size / 10) <= 1


def test_split_too_small_and_bad_fractions():
    with pytest.raises(TooSmall):
        make_split(_labeled((5, 4, 0)))
    with pytest.raises(ConfigInvalid):
        SplitSpec(0.8, 0.1, 0.2)


# --- kfold -----------------------------------------------------------------

def test_kfold_even_and_remainder():
    assert [len(f) for f in kfold(_labeled((10, 0, 0)), 5)] == [2] * 5
    assert sorted((len(f) for f in kfold(_labeled((13, 0, 0)), 5)), reverse=True) == [3, 3, 3, 2, 2]


@settings(max_examples=100)
@given(counts_strategy, st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_kfold_partition_properties(counts, k, seed):
    ds = _labeled(counts, seed)
    folds = kfold(ds, k, seed=seed)
    flat = sorted(itertools.chain.from_iterable(folds))
    assert flat == list(range(len(ds)))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    for cls in CLASSES:
        per_fold = [sum(ds.records[i].label is cls for i in f) for f in folds]
        assert max(per_fold) - min(per_fold) <= 1
    assert kfold(ds, k, seed=seed) == folds


def test_kfold_too_small():
    with pytest.raises(TooSmall):
        kfold(_labeled((3, 0, 0)), 5)


# --- metrics ---------------------------------------------------------------

def test_perfect_predictions():
    truth = [A, D, K, A]
    m = compute_metrics(truth, truth)
    assert m.accuracy == 1.0 and m.macro_f1 == 1.0


def test_hand_tallied_allow_class():
    truth = [A, A, A, D, K]
    pred = [A, A, D, A, K]
    m = compute_metrics(truth, pred)
    assert m.recall[0] == pytest.approx(2 / 3) and m.precision[0] == pytest.approx(2 / 3)
    assert m.f1[0] == pytest.approx(2 / 3)


def test_zero_denominators_are_zero():
    m = compute_metrics([A, A], [A, A])
    assert m.recall[1] == 0.0 and m.precision[2] == 0.0 and m.f1[1] == 0.0


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        compute_metrics([A], [A, D])
    with pytest.raises(LengthMismatch):
        compute_metrics([], [])


confusions = st.lists(st.integers(0, 50), min_size=9, max_size=9).filter(lambda v: sum(v) > 0).map(
    lambda v: np.array(v).reshape(3, 3))


@settings(max_examples=100)
@given(confusions)
def test_metric_identities_on_random_confusions(cm):
    m = metrics_from_confusion(cm)
    assert m.accuracy == np.trace(cm) / cm.sum()
    for v in (m.accuracy, m.macro_recall, m.macro_precision, m.macro_f1, *m.recall, *m.precision, *m.f1):
        assert 0.0 <= v <= 1.0
    assert m.total == cm.sum()


@settings(max_examples=50)
@given(st.lists(st.tuples(st.sampled_from(CLASSES), st.sampled_from(CLASSES)), min_size=1, max_size=60),
       st.randoms())
def test_permutation_invariance(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    a = compute_metrics([t for t, _ in pairs], [p for _, p in pairs])
    b = compute_metrics([t for t, _ in shuffled], [p for _, p in shuffled])
    assert a.macro_f1 == pytest.approx(b.macro_f1) and a.accuracy == b.accuracy


rows_with_support = st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)).map(sorted),
                            min_size=3, max_size=3)


@given(rows_with_support)
def test_equal_support_accuracy_is_mean_recall(cuts):
    # each row splits the same support of 20 into three counts
    cm = np.array([[lo, hi - lo, 20 - hi] for lo, hi in cuts])
    m = metrics_from_confusion(cm)
    assert m.accuracy == pytest.approx(m.macro_recall)


# --- sweep ------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_sweep():
    return run_sweep(SweepConfig(sizes=(300, 600), models=("nb", "rule"), folds=3,
                                 master_seed=5, rl=RlConfig(episodes=5)))


def test_sweep_report_count_and_rows(small_sweep):
    assert len(small_sweep.reports) == 4
    csv = small_sweep.comparison_csv().splitlines()
    assert csv[0] == "model,size,fold,accuracy,macro_recall,macro_f1"
    assert len(csv) == 5
    for r in small_sweep.reports:
        assert len(r.folds) == 3 and r.holdout is not None
        assert r.config_digest == small_sweep.config.digest()


def test_single_cell_sweep():
    res = run_sweep(SweepConfig(sizes=(200,), models=("rule",), folds=2,
                                rl=RlConfig(episodes=1)))
    assert len(res.reports) == 1


def test_sweep_independent_of_workers(small_sweep):
    cfg = small_sweep.config
    again = run_sweep(SweepConfig(cfg.sizes, cfg.models, cfg.folds, cfg.master_seed,
                                  rl=cfg.rl, workers=2))
    assert again.comparison_csv() == small_sweep.comparison_csv()
    for a, b in zip(again.reports, small_sweep.reports):
        assert a.to_json(wall_clock=False) == b.to_json(wall_clock=False)


def test_sweep_config_validation():
    with pytest.raises(ConfigInvalid):
        SweepConfig(sizes=(1000, 500))
    with pytest.raises(ConfigInvalid):
        SweepConfig(models=("svm",))


def test_report_rows_and_digest_check(small_sweep):
    docs = [r.to_json() for r in small_sweep.reports]
    assert common_digest(docs) == small_sweep.config.digest()
    assert [row[0] for row in fig3_rows(docs)] == ["nb", "rule"]
    assert len(fig4_rows(docs)) == 4
    docs[0] = dict(docs[0], config_digest="other")
    with pytest.raises(Exception, match="different configs"):
        common_digest(docs)


def test_report_json_excludes_wall_clock_on_request(small_sweep):
    r = small_sweep.reports[0]
    assert "wall_clock_seconds" in r.to_json()
    assert "wall_clock_seconds" not in r.to_json(wall_clock=False)
    assert isinstance(r, MetricsReport)
