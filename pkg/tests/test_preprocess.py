import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privpref.core import MISSING, FeatureSchema, categorical, numeric
from privpref.datagen import default_config, generate
from privpref.errors import (AnonymizationInfeasible, ConfigInvalid, EmptyClass, InsufficientDonors,
                             NoSensitiveFeatures)
from privpref.preprocess import (GeneralizationHierarchy, PreprocessConfig, augment_oversample,
                                 deduplicate, default_hierarchy, k_anonymize, knn_impute, run_pipeline)
from privpref.preprocess.anonymity import CategoricalLevels, NumericLevels, masking_levels

from conftest import A, D, K, make_ds, small_schema
from oracles import class_sizes, dedup_oracle, kanon_oracle, knn_oracle


# --- dedup ---------------------------------------------------------------

def test_dedup_definition():
    rows = [(("social", "camera", 1), A), (("finance", "camera", 1), D), (("social", "camera", 1), A)]
    out = deduplicate(make_ds(small_schema(), rows))
    assert [r.record_id for r in out.records] == [0, 1]


def test_dedup_same_features_different_label_kept():
    rows = [(("social", "camera", 1), A), (("social", "camera", 1), D)]
    assert len(deduplicate(make_ds(small_schema(), rows))) == 2


def test_dedup_matches_pairwise_oracle():
    ds = generate(default_config().with_(volume=500, duplicate_rate=0.1))
    out = deduplicate(ds)
    assert [r.record_id for r in out.records] == dedup_oracle(ds)
    assert len(out) < len(ds)


def test_dedup_idempotent(default_ds_2k):
    once = deduplicate(default_ds_2k)
    assert deduplicate(once).records == once.records


def test_dedup_count_at_10k_matches_key_count():
    ds = generate(default_config().with_(volume=10_000))
    distinct = {(r.values, r.label) for r in ds.records}
    assert len(deduplicate(ds)) == len(distinct)


# --- KNN imputation --------------------------------------------------------

def test_knn_hand_fixture():
    rows = [
        (("social", "camera", MISSING), A),
        (("social", "camera", 30), A),
        (("social", "location", 40), A),
        (("health", "storage", 90), D),
        (("finance", "storage", 100), D),
    ]
    out = knn_impute(make_ds(small_schema(), rows), PreprocessConfig(knn_k=2))
    assert out.records[0].values[2] == 35


def test_knn_tie_breaks_by_record_id():
    rows = [
        (("social", MISSING, 5), A),
        (("social", "storage", 5), A),   # distance 0, id 1
        (("social", "camera", 5), A),    # distance 0, id 2
        (("social", "camera", 5), A),    # distance 0, id 3
    ]
    out = knn_impute(make_ds(small_schema(), rows), PreprocessConfig(knn_k=1))
    assert out.records[0].values[1] == "storage"
    out = knn_impute(make_ds(small_schema(), rows), PreprocessConfig(knn_k=2))
    assert out.records[0].values[1] == "camera"  # tally 1-1, smallest token wins


def test_knn_identity_on_complete_data():
    rows = [(("social", "camera", i), A) for i in range(6)]
    ds = make_ds(small_schema(), rows)
    assert knn_impute(ds, PreprocessConfig()).records == ds.records


def test_knn_insufficient_donors():
    rows = [(("social", "camera", MISSING), A), (("social", "camera", 2), A)]
    with pytest.raises(InsufficientDonors):
        knn_impute(make_ds(small_schema(), rows), PreprocessConfig(knn_k=2))


def test_knn_matches_exhaustive_oracle():
    ds = generate(default_config().with_(volume=200, missing_rate=0.1, master_seed=9))
    out = knn_impute(ds, PreprocessConfig(knn_k=5))
    assert [r.values for r in out.records] == knn_oracle(ds, 5)


def test_knn_never_alters_observed_cells(default_ds_2k):
    out = knn_impute(default_ds_2k, PreprocessConfig())
    for before, after in zip(default_ds_2k.records, out.records):
        for b, a in zip(before.values, after.values):
            if b is not MISSING:
                assert a == b
            else:
                assert a is not MISSING


# --- k-anonymity ------------------------------------------------------------

def _zip_ds(zips):
    schema = FeatureSchema((categorical("zip", sorted(set(zips)), quasi_identifier=True),
                            categorical("context", ["social"])))
    return make_ds(schema, [((z, "social"), A) for z in zips])


def _zip_hierarchy(ds):
    return GeneralizationHierarchy({"zip": masking_levels(ds.schema["zip"].domain, 1)})


def test_kanon_level_zero_already_ok():
    ds = _zip_ds(["77001", "77002", "77001", "77002"])
    out, suppressed = k_anonymize(ds, _zip_hierarchy(ds), PreprocessConfig(anonymity_k=2))
    assert suppressed == 0 and out.records == ds.records


def test_kanon_singleton_class_is_not_suppressed_beyond_budget():
    # one of three records in a singleton class is 33% suppression, over the 5% budget,
    # so generalization climbs to the top level instead
    ds = _zip_ds(["77001", "77001", "88001"])
    out, suppressed = k_anonymize(ds, _zip_hierarchy(ds), PreprocessConfig(anonymity_k=2))
    assert suppressed == 0
    assert {r.values[0] for r in out.records} == {"*"}


def test_kanon_suppresses_within_budget():
    zips = ["77001"] * 25 + ["77002"] * 25 + ["88001"]
    ds = _zip_ds(zips)
    out, suppressed = k_anonymize(ds, _zip_hierarchy(ds), PreprocessConfig(anonymity_k=2))
    assert suppressed == 1 and len(out) == 50
    assert "88001" not in {r.values[0] for r in out.records}


def test_kanon_k1_identity():
    ds = _zip_ds(["77001", "88001"])
    out, suppressed = k_anonymize(ds, _zip_hierarchy(ds), PreprocessConfig(anonymity_k=1))
    assert suppressed == 0 and out.records == ds.records


def test_kanon_infeasible():
    ds = _zip_ds(["77001", "88001"])
    with pytest.raises(AnonymizationInfeasible):
        k_anonymize(ds, _zip_hierarchy(ds), PreprocessConfig(anonymity_k=3))


def test_kanon_requires_quasi_identifier():
    ds = make_ds(small_schema(), [(("social", "camera", 1), A)])
    with pytest.raises(ConfigInvalid):
        k_anonymize(ds, default_hierarchy(), PreprocessConfig())


def _hour_levels(lo, hi):
    def bracket(w):
        def f(x):
            start = lo + math.floor((x - lo) / w) * w
            return (start + min(start + w, hi)) / 2
        return f
    return [lambda x: x, bracket(4.0), bracket(12.0), lambda x: (lo + hi) / 2]


def _zip_levels():
    return [lambda z: z, lambda z: z[:-1] + "*", lambda z: z[:-2] + "**", lambda z: "*"]


def _two_qi_dataset(n, seed):
    rnd = random.Random(seed)
    schema = FeatureSchema((
        numeric("hour", 0, 23, quasi_identifier=True),
        categorical("zip", ["77001", "77002", "77011", "88001", "88002"], quasi_identifier=True),
        categorical("context", ["social", "finance"]),
    ))
    rows = [((round(rnd.uniform(0, 23), 3), rnd.choice(schema["zip"].domain),
              rnd.choice(["social", "finance"])), rnd.choice([A, D, K])) for _ in range(n)]
    hierarchy = GeneralizationHierarchy({
        "hour": NumericLevels((4.0, 12.0)),
        "zip": CategoricalLevels((
            {t: t[:-1] + "*" for t in schema["zip"].domain},
            {t: t[:-2] + "**" for t in schema["zip"].domain},
        )),
    })
    return make_ds(schema, rows), hierarchy


@pytest.mark.parametrize("n,k,seed", [(60, 3, 0), (200, 5, 1), (500, 5, 2), (500, 10, 3)])
def test_kanon_matches_enumeration_oracle(n, k, seed):
    ds, hierarchy = _two_qi_dataset(n, seed)
    out, suppressed = k_anonymize(ds, hierarchy, PreprocessConfig(anonymity_k=k))
    vec, rows, expected_suppressed = kanon_oracle(ds, [_hour_levels(0, 23), _zip_levels()], k)
    assert suppressed == expected_suppressed
    assert [r.values for r in out.records] == rows
    assert all(size >= k for size in class_sizes(out).values())


@settings(max_examples=30)
@given(st.lists(st.sampled_from(["77001", "77002", "88001", "88002"]), min_size=20, max_size=120),
       st.integers(2, 5))
def test_kanon_output_passes_class_size_check(zips, k):
    ds = _zip_ds(zips)
    try:
        out, suppressed = k_anonymize(ds, _zip_hierarchy(ds), PreprocessConfig(anonymity_k=k))
    except AnonymizationInfeasible:
        assert len(zips) < k
        return
    assert suppressed * 20 <= len(ds)
    assert len(out) + suppressed == len(ds)
    assert all(size >= k for size in class_sizes(out).values())


def test_numeric_levels_must_refine():
    with pytest.raises(ConfigInvalid):
        NumericLevels((4.0, 6.0))


def test_hierarchy_json_round_trip():
    h = default_hierarchy()
    assert GeneralizationHierarchy.from_json(h.to_json()) == h


# --- augmentation ---------------------------------------------------------

def _imbalanced():
    rows = [(("social", "camera", 5), A)] * 30 + [(("finance", "storage", 50), K)] * 10 + \
           [(("health", "location", 90), D)] * 20
    return make_ds(small_schema(), rows)


def test_augment_tops_up_to_target():
    ds = _imbalanced()
    out = augment_oversample(ds, PreprocessConfig(augment_target={"Ask": 25}))
    counts = out.label_counts()
    assert counts[K] == 25 and counts[A] == 30 and counts[D] == 20
    new_ids = [r.record_id for r in out.records[len(ds):]]
    assert new_ids == list(range(60, 75))
    assert "augmented[60-74]" in out.provenance


def test_augment_counts_match_counting_oracle():
    ds = _imbalanced()
    out = augment_oversample(ds, PreprocessConfig(augment_target=40))
    tally = {}
    for r in out.records:
        tally[r.label] = tally.get(r.label, 0) + 1
    assert tally == {A: 40, K: 40, D: 40}


def test_augment_unchanged_when_targets_met():
    ds = _imbalanced()
    assert augment_oversample(ds, PreprocessConfig(augment_target=5)) is ds


def test_augment_empty_class():
    rows = [(("social", "camera", 5), A)] * 3
    with pytest.raises(EmptyClass):
        augment_oversample(make_ds(small_schema(), rows), PreprocessConfig(augment_target=4))


def test_augmented_values_stay_in_domain():
    out = augment_oversample(_imbalanced(), PreprocessConfig(augment_target=200, seed=3))
    for r in out.records:
        out.schema.validate_values(r.values)


# --- pipeline ---------------------------------------------------------------

def test_pipeline_is_deterministic(default_ds_2k):
    cfg = PreprocessConfig(seed=11)
    a, log_a = run_pipeline(default_ds_2k, cfg)
    b, log_b = run_pipeline(default_ds_2k, cfg)
    assert a.records == b.records and log_a == log_b
    assert log_a["ops"] == ["deduplicate", "knn_impute", "k_anonymize", "dp_randomize"]
    assert all(r.complete for r in a.records)


def test_pipeline_without_sensitive_features_skips_dp():
    plain = FeatureSchema((categorical("context", ["social"]), categorical("permission", ["camera"]),
                           numeric("prior_denials", 0, 10)))
    ds = make_ds(plain, [(("social", "camera", i % 7), A if i % 2 else D) for i in range(30)])
    _, log = run_pipeline(ds, PreprocessConfig())
    assert "dp_randomize" not in log["ops"]
