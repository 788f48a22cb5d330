"""Text-based Bayesian decision making over LLM-abduced factors.

A scenario with two complementary outcomes is conceptualized into
discrete factors; a learnable table of per-value probabilities feeds a
log-linear opinion pool; marginalizing the pool over every complete
assignment consistent with a partial observation yields interpretable,
controllable outcome probabilities.
"""

from .engine import (
    Contribution,
    FollowupQuestion,
    OutcomeEstimate,
    PairwiseChoice,
    PreferenceOverride,
    Verdict,
    apply_answer,
    assignment_weight,
    infer,
    pairwise_prefer,
    select_followup,
)
from .errors import (
    AlreadyObservedError,
    BirdError,
    DomainError,
    FixtureMissError,
    NotComparableError,
    NothingToAskError,
    ParseError,
    ProviderError,
    SpaceTooLargeError,
    UnknownScenarioError,
    UnknownSessionError,
    ValidationError,
)
from .factors import (
    CompleteAssignment,
    Condition,
    Factor,
    FactorSpace,
    FactorValue,
    PartialObservation,
    Scenario,
    Support,
    assignment_at,
    enumerate_space,
    sample_assignments,
)
from .pool import (
    EstimatorKind,
    PoolWeights,
    ProbabilityTable,
    estimate_half,
    estimate_one_over_n,
    estimate_outcome_given_f,
    initial_probability,
    pool_equal,
    pool_weighted,
)
from .trainer import (
    DirectionTargets,
    TrainingConfig,
    TrainingSample,
    TrainResult,
    init_table,
    train,
)

__all__ = [
    "AlreadyObservedError",
    "BirdError",
    "CompleteAssignment",
    "Condition",
    "Contribution",
    "DirectionTargets",
    "DomainError",
    "EstimatorKind",
    "Factor",
    "FactorSpace",
    "FactorValue",
    "FixtureMissError",
    "FollowupQuestion",
    "NotComparableError",
    "NothingToAskError",
    "OutcomeEstimate",
    "PairwiseChoice",
    "ParseError",
    "PartialObservation",
    "PoolWeights",
    "PreferenceOverride",
    "ProbabilityTable",
    "ProviderError",
    "Scenario",
    "SpaceTooLargeError",
    "Support",
    "TrainResult",
    "TrainingConfig",
    "TrainingSample",
    "UnknownScenarioError",
    "UnknownSessionError",
    "ValidationError",
    "Verdict",
    "apply_answer",
    "assignment_at",
    "assignment_weight",
    "enumerate_space",
    "estimate_half",
    "estimate_one_over_n",
    "estimate_outcome_given_f",
    "infer",
    "init_table",
    "initial_probability",
    "pairwise_prefer",
    "pool_equal",
    "pool_weighted",
    "sample_assignments",
    "select_followup",
    "train",
]
