"""Group testing on correlated populations.

Candidate infected sets are hyperedges with a probability mass function; one
edge is realized and group tests narrow the posterior until it is identified.
"""

from .adaptive import AdaptiveConfig, find_split_set, run_adaptive, run_base, run_regular, run_truncated
from .builders import ModelSpec, build_model
from .errors import (
    DuplicateEdge,
    EmptySupport,
    MismatchedConfig,
    ModelError,
    NegativeProbability,
    NodeOutOfRange,
    NotNormalized,
    NotRegular,
    OracleInconsistent,
    SupportTooLarge,
    TooLarge,
    ZeroSurvivorMass,
)
from .harness import ExperimentConfig, TrialResult, check_bounds, run_experiment, summarize
from .model import (
    EdgeDistribution,
    GroundTruth,
    Hypergraph,
    Posterior,
    TestRecord,
    certain_edge,
    condition_on_test,
    edge_entropy,
    edge_set,
    expected_infections,
    load_model,
    node_marginal,
    node_marginals,
    noiseless_oracle,
    prior_posterior,
    sample_truth,
    save_model,
    set_weight,
    validate_model,
)
from .noisy import (
    NoiseChannel,
    RepetitionSchedule,
    bayes_update_noisy,
    majority_error_probability,
    majority_test,
    noisy_oracle,
    run_noisy_adaptive,
    run_noisy_snagt,
)
from .oracle import direct_posterior, nonadaptive_min_error, optimal_expected_tests, simulate_policy
from .snagt import (
    CandidateTracker,
    SnagtConfig,
    SubgraphPartition,
    partition_dyadic,
    preprocess_truncate,
    random_test_set,
    run_snagt,
)
from .transcript import Transcript

__all__ = [name for name in dir() if not name.startswith("_")]
