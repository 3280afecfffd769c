"""Decision fusion for classifier score matrices.

Combines the predicted class-probability matrices of several
classifiers into one decision, deriving per-classifier relative weights
from column-wise generalized (Tsallis) or Shannon entropy. Ships plain
sum-rule and fixed-weight fusion for comparison, three small built-in
classifiers, dataset loaders, metrics, and a CLI.
"""

from fusekit.classifiers import (
    LabeledDataset,
    TrainConfig,
    TrainedModel,
    accuracy,
    load_model,
    predict_proba,
    save_model,
    train,
)
from fusekit.errors import (
    CalibrationError,
    DataFormatError,
    DegenerateWeightsError,
    FusekitError,
    IntegrityError,
    InvalidConfigError,
    InvalidInputError,
    ParseQualityError,
    SchemaError,
    ShapeError,
    StratificationError,
    UnsupportedSizeError,
)
from fusekit.fusion import (
    EntropyConfig,
    FusedDecision,
    FusionWeights,
    NegativeEntropyWarning,
    ScoreMatrix,
    argmax_labels,
    classifier_entropy,
    entropy_weighted_fusion,
    entropy_weights,
    shannon_column_entropy,
    sum_fusion,
    tsallis_column_entropy,
    weighted_sum_fusion,
)
from fusekit.kernels import active_backend, available_backends

__version__ = "0.1.0"

__all__ = [
    "EntropyConfig",
    "ScoreMatrix",
    "FusionWeights",
    "FusedDecision",
    "NegativeEntropyWarning",
    "tsallis_column_entropy",
    "shannon_column_entropy",
    "classifier_entropy",
    "entropy_weights",
    "sum_fusion",
    "weighted_sum_fusion",
    "entropy_weighted_fusion",
    "argmax_labels",
    "LabeledDataset",
    "TrainConfig",
    "TrainedModel",
    "train",
    "predict_proba",
    "accuracy",
    "save_model",
    "load_model",
    "active_backend",
    "available_backends",
    "FusekitError",
    "InvalidConfigError",
    "InvalidInputError",
    "ShapeError",
    "DegenerateWeightsError",
    "DataFormatError",
    "IntegrityError",
    "CalibrationError",
    "SchemaError",
    "ParseQualityError",
    "StratificationError",
    "UnsupportedSizeError",
    "__version__",
]
