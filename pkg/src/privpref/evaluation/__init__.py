from .metrics import Metrics, compute_metrics, confusion_matrix, mean_metrics, metrics_from_confusion
from .splits import SplitSpec, complement, kfold, make_split
from .sweep import (
    DEFAULT_MODELS,
    DEFAULT_SIZES,
    MODEL_FACTORIES,
    MetricsReport,
    SweepConfig,
    SweepResult,
    make_model,
    run_sweep,
    write_sweep,
)
from .report import common_digest, fig3_rows, fig4_rows, load_reports, write_plot_data
