"""Evolutionary search over generative-model latent spaces.

The package evolves latent vectors with a real-coded genetic algorithm so
that the images a generator produces from them embed as close as possible to
a target embedding. Evaluation backends are pluggable: a deterministic
synthetic world for tests and benchmarks, or an external model worker spoken
to over a framed JSON pipe protocol.
"""

from __future__ import annotations

from .bridge import (
    PROTOCOL_VERSION,
    BridgeError,
    BridgeEvaluator,
    EvaluationTargetUnset,
    ProtocolError,
    TransportError,
    WorkerError,
    WorkerHandle,
)
from .core import (
    ConfigError,
    Embedding,
    EvolutionConfig,
    Individual,
    LatentVector,
    Rng,
    config_from_dict,
    derive_child_seed,
    load_config,
    make_rng,
    sample_standard_normal,
)
from .engine import (
    GenerationStats,
    HallOfFame,
    RunAborted,
    RunRecord,
    best_so_far,
    best_so_far_curve,
    run_evolution,
)
from .evaluators import (
    BatchEvaluator,
    EvaluationError,
    SyntheticWorld,
    distance_to_fitness,
    euclidean_distance,
)
from .metrics import (
    DistanceSummary,
    DiversityMatrix,
    convergence_curves,
    deception_delta,
    diversity_matrix,
    format_distance_summary,
    format_diversity_summary,
    parse_distance_summary,
    parse_diversity_summary,
    summarize_distances,
)
from .operators import (
    OperatorParams,
    blx_crossover,
    gaussian_mutate,
    init_individual,
    tournament_select,
)

__version__ = "0.1.0"

__all__ = [
    "BatchEvaluator",
    "BridgeError",
    "BridgeEvaluator",
    "ConfigError",
    "DistanceSummary",
    "DiversityMatrix",
    "Embedding",
    "EvaluationError",
    "EvaluationTargetUnset",
    "EvolutionConfig",
    "GenerationStats",
    "HallOfFame",
    "Individual",
    "LatentVector",
    "OperatorParams",
    "PROTOCOL_VERSION",
    "ProtocolError",
    "Rng",
    "RunAborted",
    "RunRecord",
    "SyntheticWorld",
    "TransportError",
    "WorkerError",
    "WorkerHandle",
    "best_so_far",
    "best_so_far_curve",
    "blx_crossover",
    "config_from_dict",
    "convergence_curves",
    "deception_delta",
    "derive_child_seed",
    "distance_to_fitness",
    "diversity_matrix",
    "euclidean_distance",
    "format_distance_summary",
    "format_diversity_summary",
    "gaussian_mutate",
    "init_individual",
    "load_config",
    "make_rng",
    "parse_distance_summary",
    "parse_diversity_summary",
    "run_evolution",
    "sample_standard_normal",
    "summarize_distances",
    "tournament_select",
]
