"""Binary atom search optimization for wrapper feature selection."""
from .annealing import AnnealOutcome, AnnealSchedule, anneal, boltzmann_p, perturb
from .binarize import FlipMode, FlipPolicy, TransferKind, apply_flip, transfer
from .datasets import Dataset, SplitSpec, load_bundled, load_csv, normalize, prepare, split
from .errors import ConfigError, DataError, InvalidMaskError
from .evaluation import (
    ClassifierSpec,
    EvaluationContext,
    FitnessValue,
    FitnessWeights,
    KNNClassifier,
    evaluate,
    fitness,
    knn_error,
)
from .optimizer import METHODS, OptimizerConfig, RunReport, run

__version__ = "0.1.0"
