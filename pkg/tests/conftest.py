import os

import pytest
from hypothesis import HealthCheck, settings

from privpref.core import FeatureSchema, LabeledDataset, PrivacyChoice, PrivacyRecord, categorical, numeric
from privpref.datagen import default_config, generate

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

A, D, K = PrivacyChoice.ALLOW, PrivacyChoice.DENY, PrivacyChoice.ASK


def small_schema(qi_zip: bool = False) -> FeatureSchema:
    feats = [
        categorical("context", ["social", "finance", "health"]),
        categorical("permission", ["camera", "location", "storage"], sensitive=True),
        numeric("prior_denials", 0, 100, integer=True),
    ]
    if qi_zip:
        feats.append(categorical("zip", ["77001", "77002", "88001", "88002"], quasi_identifier=True))
    return FeatureSchema(tuple(feats))


def make_ds(schema, rows, provenance="fixture") -> LabeledDataset:
    records = [PrivacyRecord(i, tuple(v), lab) for i, (v, lab) in enumerate(rows)]
    return LabeledDataset(schema, tuple(records), provenance)


@pytest.fixture(scope="session")
def default_ds_2k():
    return generate(default_config().with_(volume=2000))


# acceptance criteria record their verdicts here; printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
