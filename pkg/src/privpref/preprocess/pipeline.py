from __future__ import annotations

from ..core import LabeledDataset
from .anonymity import GeneralizationHierarchy, chosen_levels, default_hierarchy, k_anonymize
from .augment import augment_oversample
from .config import PreprocessConfig
from .dedup import deduplicate
from .dp import dp_randomize
from .impute import knn_impute


def run_pipeline(ds: LabeledDataset, cfg: PreprocessConfig,
                 hierarchy: GeneralizationHierarchy | None = None
                 ) -> tuple[LabeledDataset, dict]:
    """dedup -> impute -> k-anonymize -> randomize -> augment.

    Steps that do not apply (no quasi-identifiers, DP disabled, no augment
    target) are skipped. Returns the dataset and a provenance record.
    """
    hierarchy = hierarchy or default_hierarchy()
    log: dict = {"input_records": len(ds), "ops": []}

    out = deduplicate(ds)
    log["ops"].append("deduplicate")
    log["duplicates_removed"] = len(ds) - len(out)

    out = knn_impute(out, cfg)
    log["ops"].append("knn_impute")

    if out.schema.quasi_identifiers and cfg.anonymity_k > 1:
        log["generalization_levels"] = list(chosen_levels(out, hierarchy, cfg))
        out, suppressed = k_anonymize(out, hierarchy, cfg)
        log["ops"].append("k_anonymize")
        log["suppressed_count"] = suppressed

    if cfg.dp_enabled and out.schema.sensitive:
        out = dp_randomize(out, cfg)
        log["ops"].append("dp_randomize")
        log["dp_epsilon"] = cfg.dp_epsilon

    if cfg.augment_target is not None:
        before = len(out)
        out = augment_oversample(out, cfg)
        log["ops"].append("augment_oversample")
        log["augmented_records"] = len(out) - before

    log["output_records"] = len(out)
    log["config"] = cfg.to_json()
    return out, log
