"""ranpredict: uplink KPI prediction from per-TTI radio telemetry.

Ingests MCS/TTI/BLER/SNR/bit-rate logs, trains five from-scratch regressors
(linear, CART tree, random forest, and two gradient-boosting variants), and
produces comparison tables, gain-based feature importances, scatter pairs,
and prediction-error histograms.
"""

from .dataset import (
    FeatureMatrix,
    Scaler,
    TargetVector,
    TaskSpec,
    build_task,
    fit_scaler,
    split_train_test,
    transform,
)
from .errors import (
    ConfigError,
    CsvSchemaError,
    ModelDecodeError,
    RanpredictError,
    UnsupportedModelError,
)
from .importance import ImportanceEntry, ImportanceReport, gain_importance
from .ingest import (
    CleaningPolicy,
    MetricRecord,
    ParseResult,
    RowError,
    align_timestamps,
    filter_outliers,
    parse_metrics_csv,
    write_metrics_csv,
)
from .metrics import (
    DegenerateTargetError,
    ErrorHistogram,
    EvalResult,
    error_histogram,
    evaluate,
    mse,
    r2,
    rmse,
)
from .regressors import (
    BoostedModel,
    ForestModel,
    Histogram,
    LinearModel,
    TreeModel,
    build_histogram,
    deserialize_model,
    fit_boosted_leafwise,
    fit_boosted_second_order,
    fit_forest,
    fit_linear,
    fit_tree,
    predict,
    serialize_model,
)
from .synthgen import GenConfig, generate

__version__ = "0.1.0"
