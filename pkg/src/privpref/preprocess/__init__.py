from .anonymity import (CategoricalLevels, GeneralizationHierarchy, NumericLevels,
                        candidate_levels, default_hierarchy, k_anonymize, masking_levels)
from .augment import augment_oversample
from .config import PreprocessConfig
from .dedup import deduplicate
from .dp import dp_randomize, keep_probability, randomized_response
from .impute import knn_impute
from .pipeline import run_pipeline

__all__ = [
    "CategoricalLevels", "GeneralizationHierarchy", "NumericLevels", "PreprocessConfig",
    "augment_oversample", "candidate_levels", "deduplicate", "default_hierarchy",
    "dp_randomize", "k_anonymize", "keep_probability", "knn_impute", "masking_levels",
    "randomized_response", "run_pipeline",
]
