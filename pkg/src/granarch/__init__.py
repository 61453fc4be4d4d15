"""Multi-objective genetic search over audio input granularity and small CNN architectures."""

from .dsp import DspConfig, buffer_size_bytes, feature_shape
from .estimator import EstimatorConfig, estimate_model_size_bytes, realize, total_footprint_bytes
from .evaluation import EvaluationCache, ExternalEvaluator, SyntheticEvaluator, TrainConfig
from .genetic import GaConfig, InitMode, run_search
from .objectives import MetricsRecord, ObjectiveConfig, pareto_frontier, scalar_fitness
from .search_space import (
    Activation,
    Genome,
    Preprocessing,
    SearchSpace,
    canonical_decode,
    canonical_encode,
    make_genome,
    random_genome,
    trivial_genome,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Activation",
    "DspConfig",
    "EstimatorConfig",
    "EvaluationCache",
    "ExternalEvaluator",
    "GaConfig",
    "Genome",
    "InitMode",
    "MetricsRecord",
    "ObjectiveConfig",
    "Preprocessing",
    "SearchSpace",
    "SyntheticEvaluator",
    "TrainConfig",
    "buffer_size_bytes",
    "canonical_decode",
    "canonical_encode",
    "estimate_model_size_bytes",
    "feature_shape",
    "make_genome",
    "pareto_frontier",
    "random_genome",
    "realize",
    "run_search",
    "scalar_fitness",
    "total_footprint_bytes",
    "trivial_genome",
    "validate",
]
