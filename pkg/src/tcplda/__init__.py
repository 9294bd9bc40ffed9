"""Two-covariance PLDA with EM training and log-likelihood-ratio scoring."""
from tcplda._backend import available as available_backends
from tcplda.em import (
    ClassPosterior,
    PldaModel,
    TrainConfig,
    TrainReport,
    e_step_class,
    em_train,
    log_likelihood,
    m_step,
    train_from_stats,
)
from tcplda.errors import (
    AlignmentError,
    DimensionMismatch,
    EmptyEnrollment,
    FormatError,
    NonFiniteLikelihood,
    NotPositiveDefinite,
    PldaError,
    TooFewClasses,
)
from tcplda.scoring import Enrollment, enroll, score_llr
from tcplda.stats import ClassStats, DatasetStats, LabeledDataset, accumulate_stats, center_dataset
from tcplda.synth import SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "AlignmentError", "ClassPosterior", "ClassStats", "DatasetStats", "DimensionMismatch",
    "EmptyEnrollment", "Enrollment", "FormatError", "LabeledDataset", "NonFiniteLikelihood",
    "NotPositiveDefinite", "PldaError", "PldaModel", "SynthSpec", "TooFewClasses", "TrainConfig",
    "TrainReport", "accumulate_stats", "available_backends", "center_dataset", "e_step_class",
    "em_train", "enroll", "generate", "log_likelihood", "m_step", "score_llr", "train_from_stats",
]
