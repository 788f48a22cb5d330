"""Opinion-pool aggregation and the closed-form baseline estimators.

P(O1|f) for a complete assignment f is a log-linear pool of the per-value
probabilities P(O1|f_j): each value contributes its log-odds, weighted, on
top of the prior's log-odds. With unit weights and a 0.5 prior this reduces
to prod(p_j) / (prod(p_j) + prod(1-p_j)), but it is always evaluated in
log space so long products cannot underflow.

The baseline estimators (half assumption, one-over-n count, fixed initial
probabilities) stand in for the pooled probability when no trained table
is wanted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, ValidationError
from .factors import CompleteAssignment, FactorSpace, Support

# Probability clamp bound: table entries live in [delta, 1 - delta] because
# the pool is only defined on the open interval and elicited targets
# include 0 and 1.
DEFAULT_DELTA = 1e-3

# Per-value starting probabilities keyed by classified support direction.
INITIAL_PROBABILITY: dict[Support, float] = {
    Support.OUTCOME1: 0.75,
    Support.NEUTRAL: 0.5,
    Support.OUTCOME2: 0.25,
}


def initial_probability(support: Support) -> float:
    """The fixed starting value of P(O1|value) for a support label."""
    return INITIAL_PROBABILITY[support]


def _logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


class EstimatorKind(Enum):
    """How P(O_i|f) is produced for a complete assignment."""

    TRAINED = "trained"
    FIXED_INIT = "fixed"
    HALF_ASSUMPTION = "half"
    ONE_OVER_N = "one-over-n"


@dataclass(frozen=True)
class PoolWeights:
    """Per-factor pool weights and the outcome prior."""

    weights: tuple[float, ...]
    prior: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if any(w <= 0 for w in self.weights):
            raise ValidationError("pool weights must all be positive")
        if not 0.0 < self.prior < 1.0:
            raise ValidationError(f"prior must be in (0, 1), got {self.prior}")

    @classmethod
    def equal(cls, n: int, prior: float = 0.5) -> "PoolWeights":
        return cls(weights=(1.0,) * n, prior=prior)


@dataclass(frozen=True)
class ProbabilityTable:
    """The learnable parameters: P(O1|value) for every factor value.

    Only the outcome-1 probability is stored; the outcome-2 probability is
    always derived as its complement. Entries are clamped into
    [delta, 1 - delta] at construction. Each entry keeps the support label
    its value was classified with, which the fixed-init and counting
    baselines read instead of the probabilities.
    """

    probs: Mapping[tuple[str, str], float]
    supports: Mapping[tuple[str, str], Support]
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise ValidationError(f"delta must be in (0, 0.5), got {self.delta}")
        clamped = {
            key: min(max(float(p), self.delta), 1.0 - self.delta)
            for key, p in self.probs.items()
        }
        if set(clamped) != set(self.supports):
            raise ValidationError("probs and supports must cover the same values")
        object.__setattr__(self, "probs", MappingProxyType(clamped))
        object.__setattr__(self, "supports", MappingProxyType(dict(self.supports)))

    @classmethod
    def for_space(
        cls,
        space: FactorSpace,
        probs: Mapping[tuple[str, str], float],
        delta: float = DEFAULT_DELTA,
    ) -> "ProbabilityTable":
        """Build a table for a space, taking supports from the space's values."""
        supports = {
            (f.factor_id, v.value_id): v.support for f, v in space.value_pairs()
        }
        if set(probs) != set(supports):
            raise ValidationError("probs must cover every value of every factor")
        return cls(probs=probs, supports=supports, delta=delta)

    def validate_covers(self, space: FactorSpace) -> None:
        keys = {(f.factor_id, v.value_id) for f, v in space.value_pairs()}
        if set(self.probs) != keys:
            raise ValidationError("table does not cover the space exactly")

    def p(self, factor_id: str, value_id: str) -> float:
        try:
            return self.probs[(factor_id, value_id)]
        except KeyError:
            raise ValidationError(
                f"table has no entry for ({factor_id!r}, {value_id!r})"
            ) from None

    def support(self, factor_id: str, value_id: str) -> Support:
        return self.supports[(factor_id, value_id)]

    def with_updates(
        self, updates: Mapping[tuple[str, str], float]
    ) -> "ProbabilityTable":
        """A copy with some probabilities replaced (clamped as usual)."""
        for key in updates:
            if key not in self.probs:
                raise ValidationError(f"unknown table entry {key!r}")
        merged = dict(self.probs)
        merged.update(updates)
        return ProbabilityTable(probs=merged, supports=self.supports, delta=self.delta)

    def assignment_probs(
        self, space: FactorSpace, f: CompleteAssignment
    ) -> list[float]:
        f.validate(space)
        return [
            self.p(factor.factor_id, factor.values[idx].value_id)
            for factor, idx in zip(space.factors, f.indices)
        ]

    def assignment_supports(
        self, space: FactorSpace, f: CompleteAssignment
    ) -> list[Support]:
        f.validate(space)
        return [factor.values[idx].support for factor, idx in zip(space.factors, f.indices)]


def pool_weighted(probs: Sequence[float], weights: PoolWeights) -> float:
    """Weighted log-linear opinion pool of per-value probabilities.

    Returns the pooled P(O1|f). Evaluated as a sum of weighted log-odds
    relative to the prior, then squashed, which is exact on the open
    interval and immune to product underflow.
    """
    if not probs:
        raise ValidationError("pool needs at least one probability")
    if len(probs) != len(weights.weights):
        raise ValidationError(
            f"{len(probs)} probabilities but {len(weights.weights)} weights"
        )
    for p in probs:
        if not 0.0 < p < 1.0:
            raise DomainError(
                f"pooled probabilities must lie strictly inside (0, 1), got {p}"
            )
    prior_logit = _logit(weights.prior)
    score = prior_logit + math.fsum(
        w * (_logit(p) - prior_logit) for p, w in zip(probs, weights.weights)
    )
    return _sigmoid(score)


def pool_equal(
    space: FactorSpace, table: ProbabilityTable, f: CompleteAssignment
) -> float:
    """Equal-weight pool with a 0.5 prior: the estimated P(O1|f)."""
    probs = table.assignment_probs(space, f)
    return pool_weighted(probs, PoolWeights.equal(len(probs)))


def estimate_half(supports: Iterable[Support]) -> float:
    """All-or-nothing estimate of P(O1|f) from support labels alone.

    1 when the non-neutral labels uniformly back outcome 1 (and at least
    one exists), 0 symmetrically for outcome 2, 0.5 for mixed or
    all-neutral labels.
    """
    labels = list(supports)
    if not labels:
        raise ValidationError("need at least one support label")
    non_neutral = {s for s in labels if s is not Support.NEUTRAL}
    if non_neutral == {Support.OUTCOME1}:
        return 1.0
    if non_neutral == {Support.OUTCOME2}:
        return 0.0
    return 0.5


def estimate_one_over_n(supports: Iterable[Support], outcome: int = 1) -> float:
    """Counting estimate: the fraction of values whose label backs the outcome.

    Neutral values count toward neither outcome, so the two outcome scores
    need not sum to 1; callers compare them by argmax.
    """
    labels = list(supports)
    if not labels:
        raise ValidationError("need at least one support label")
    target = Support.OUTCOME1 if outcome == 1 else Support.OUTCOME2
    return sum(1 for s in labels if s is target) / len(labels)


def estimate_outcome_given_f(
    kind: EstimatorKind,
    space: FactorSpace,
    table: ProbabilityTable,
    f: CompleteAssignment,
    outcome: int = 1,
) -> float:
    """P(outcome|f) under the chosen estimator.

    TRAINED pools the table's probabilities; FIXED_INIT pools the fixed
    starting values implied by each value's support label, never the
    trained ones; HALF_ASSUMPTION and ONE_OVER_N look only at the labels.
    """
    if outcome not in (1, 2):
        raise ValidationError(f"outcome must be 1 or 2, got {outcome}")
    if kind is EstimatorKind.TRAINED:
        p1 = pool_equal(space, table, f)
        return p1 if outcome == 1 else 1.0 - p1
    if kind is EstimatorKind.FIXED_INIT:
        probs = [initial_probability(s) for s in table.assignment_supports(space, f)]
        p1 = pool_weighted(probs, PoolWeights.equal(len(probs)))
        return p1 if outcome == 1 else 1.0 - p1
    supports = table.assignment_supports(space, f)
    if kind is EstimatorKind.HALF_ASSUMPTION:
        p1 = estimate_half(supports)
        return p1 if outcome == 1 else 1.0 - p1
    if kind is EstimatorKind.ONE_OVER_N:
        return estimate_one_over_n(supports, outcome)
    raise ValidationError(f"unknown estimator kind {kind!r}")


def is_complementary(kind: EstimatorKind) -> bool:
    """Whether the two outcome scores of this estimator always sum to 1."""
    return kind is not EstimatorKind.ONE_OVER_N
