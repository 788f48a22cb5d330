"""Deductive inference over the factor space.

Given a partial observation of factor values, the outcome probability is
the marginal P(O_i|C) = sum over complete assignments f of
P(O_i|f) * P(f|C). Observed factors put all their mass on the observed
value; unobserved factors are uniform over their values, so P(f|C) is
either 0 (conflict) or a constant product of 1/card terms.

Also implements the interactive surface on top of that marginal:
human preference overrides, follow-up question selection, and folding a
yes/no answer back into the observation.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Callable, Iterator, Mapping, Sequence

from .errors import (
    AlreadyObservedError,
    NotComparableError,
    NothingToAskError,
    ValidationError,
)
from .factors import (
    DEFAULT_SPACE_CAP,
    CompleteAssignment,
    Factor,
    FactorSpace,
    PartialObservation,
    check_cap,
)
from .pool import EstimatorKind, ProbabilityTable, estimate_outcome_given_f, is_complementary

DEFAULT_TIE_TOLERANCE = 1e-9


class Verdict(Enum):
    OUTCOME1 = "outcome1"
    OUTCOME2 = "outcome2"
    TIE = "tie"
    UNKNOWN = "unknown"


class PairwiseChoice(Enum):
    CONDITION1 = "condition1"
    CONDITION2 = "condition2"
    SAME = "same"


@dataclass(frozen=True)
class Contribution:
    """One consistent assignment's share of the marginal."""

    assignment: CompleteAssignment
    weight: float
    p_outcome1: float


@dataclass(frozen=True)
class OutcomeEstimate:
    """The marginal outcome probabilities plus their per-assignment breakdown.

    p_outcome1 + p_outcome2 == 1 for the complementary estimators; the
    counting estimator scores each outcome independently, so its two
    probabilities are compared by argmax instead. The verdict is Unknown
    exactly when the observation was empty; the probabilities are still
    reported then (a uniform marginal over the whole space) so callers can
    inspect the prior tendency.
    """

    p_outcome1: float
    p_outcome2: float
    verdict: Verdict
    kind: EstimatorKind
    contributions: tuple[Contribution, ...] = ()

    @property
    def leading_outcome(self) -> int:
        """1 or 2; ties and unknowns lean to outcome 1 by convention."""
        return 2 if self.p_outcome2 > self.p_outcome1 else 1


@dataclass(frozen=True)
class PreferenceOverride:
    """Human-supplied replacements for P(O1|value) table entries."""

    values: Mapping[tuple[str, str], float]

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    @classmethod
    def empty(cls) -> "PreferenceOverride":
        return cls(values={})

    def is_empty(self) -> bool:
        return not self.values

    def apply(self, table: ProbabilityTable) -> ProbabilityTable:
        """A copy of the table with the overridden entries (clamped to its delta)."""
        if not self.values:
            return table
        return table.with_updates(self.values)


@dataclass(frozen=True)
class FollowupQuestion:
    """A yes/no question about one value of one unobserved factor."""

    factor_id: str
    value_id: str
    question_text: str


def default_question_text(value_text: str) -> str:
    return f"Is it the case that {value_text}?"


def assignment_weight(
    obs: PartialObservation, f: CompleteAssignment, space: FactorSpace
) -> float:
    """P(f|C): 0 on conflict with an observed value, else the product of
    1/card over the unobserved factors."""
    f.validate(space)
    weight = 1.0
    for position, factor in enumerate(space.factors):
        observed = obs.values.get(factor.factor_id)
        actual = factor.values[f.indices[position]].value_id
        if observed is None:
            weight /= factor.cardinality
        elif observed != actual:
            return 0.0
    return weight


def _consistent_assignments(
    space: FactorSpace, obs: PartialObservation
) -> Iterator[CompleteAssignment]:
    """All assignments agreeing with obs, in enumeration order."""
    pinned: list[Sequence[int]] = []
    for factor in space.factors:
        observed = obs.values.get(factor.factor_id)
        if observed is None:
            pinned.append(range(factor.cardinality))
        else:
            pinned.append((factor.value_index(observed),))
    for indices in itertools.product(*pinned):
        yield CompleteAssignment(indices=indices)


def _uniform_weight(space: FactorSpace, obs: PartialObservation) -> float:
    weight = 1.0
    for factor in space.factors:
        if factor.factor_id not in obs.values:
            weight /= factor.cardinality
    return weight


def infer(
    space: FactorSpace,
    table: ProbabilityTable,
    obs: PartialObservation,
    kind: EstimatorKind = EstimatorKind.TRAINED,
    overrides: PreferenceOverride | None = None,
    *,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    cap: int = DEFAULT_SPACE_CAP,
) -> OutcomeEstimate:
    """Marginalize P(O_i|f) over all assignments consistent with obs.

    Only consistent assignments are visited; every inconsistent one has
    weight zero and cannot contribute. An empty observation yields verdict
    Unknown, with the probabilities still computed across the full space.
    """
    table.validate_covers(space)
    obs.validate(space)
    check_cap(space, cap)
    effective = overrides.apply(table) if overrides is not None else table
    weight = _uniform_weight(space, obs)

    contributions: list[Contribution] = []
    terms1: list[float] = []
    terms2: list[float] = []
    for f in _consistent_assignments(space, obs):
        p1 = estimate_outcome_given_f(kind, space, effective, f, outcome=1)
        terms1.append(p1)
        if is_complementary(kind):
            terms2.append(1.0 - p1)
        else:
            terms2.append(estimate_outcome_given_f(kind, space, effective, f, outcome=2))
        contributions.append(Contribution(assignment=f, weight=weight, p_outcome1=p1))

    p1 = weight * math.fsum(terms1)
    p2 = weight * math.fsum(terms2)

    if obs.is_empty:
        verdict = Verdict.UNKNOWN
    elif is_complementary(kind) and abs(p1 - 0.5) < tie_tolerance:
        verdict = Verdict.TIE
    elif not is_complementary(kind) and abs(p1 - p2) < tie_tolerance:
        verdict = Verdict.TIE
    elif p1 > p2:
        verdict = Verdict.OUTCOME1
    else:
        verdict = Verdict.OUTCOME2

    return OutcomeEstimate(
        p_outcome1=p1,
        p_outcome2=p2,
        verdict=verdict,
        kind=kind,
        contributions=tuple(contributions),
    )


def pairwise_prefer(
    space: FactorSpace,
    table: ProbabilityTable,
    obs1: PartialObservation,
    obs2: PartialObservation,
    target_outcome: int = 1,
    kind: EstimatorKind = EstimatorKind.TRAINED,
    *,
    tolerance: float = DEFAULT_TIE_TOLERANCE,
) -> PairwiseChoice:
    """Which of two observations gives the target outcome more probability.

    Each observation is scored independently by infer; Same when the two
    scores differ by less than the tolerance.
    """
    if target_outcome not in (1, 2):
        raise ValidationError(f"target outcome must be 1 or 2, got {target_outcome}")
    if obs1.is_empty or obs2.is_empty:
        raise NotComparableError(
            "both observations must be non-empty to compare conditions"
        )
    est1 = infer(space, table, obs1, kind)
    est2 = infer(space, table, obs2, kind)
    score1 = est1.p_outcome1 if target_outcome == 1 else est1.p_outcome2
    score2 = est2.p_outcome1 if target_outcome == 1 else est2.p_outcome2
    if abs(score1 - score2) < tolerance:
        return PairwiseChoice.SAME
    return PairwiseChoice.CONDITION1 if score1 > score2 else PairwiseChoice.CONDITION2


def _best_value_for_leader(
    factor: Factor, table: ProbabilityTable, leader: int
) -> str:
    """The value whose table entry pushes hardest toward the leading outcome.

    Leader outcome 1 wants the highest P(O1|value), outcome 2 the lowest;
    ties keep the earliest value.
    """
    best_id = factor.values[0].value_id
    best_p = table.p(factor.factor_id, best_id)
    for value in factor.values[1:]:
        p = table.p(factor.factor_id, value.value_id)
        if (leader == 1 and p > best_p) or (leader == 2 and p < best_p):
            best_id, best_p = value.value_id, p
    return best_id


def select_followup(
    space: FactorSpace,
    table: ProbabilityTable,
    obs: PartialObservation,
    seed: int,
    kind: EstimatorKind = EstimatorKind.TRAINED,
    *,
    strategy: str = "random",
    rephrase: Callable[[str], str] | None = None,
) -> FollowupQuestion:
    """Pick an unobserved factor and phrase a yes/no question about it.

    The factor is chosen uniformly at random (seeded). Within the factor,
    the targeted value is the one whose P(O1|value) most favors the
    outcome currently leading the estimate (an exactly tied estimate leans
    to outcome 1). strategy="shift" replaces the random factor choice with
    the factor whose answers would move the estimate most in expectation.
    question_text comes from the rephrase callable when given, else from a
    fixed template around the value text.
    """
    if strategy not in ("random", "shift"):
        raise ValidationError(f"unknown follow-up strategy {strategy!r}")
    unobserved = [f for f in space.factors if f.factor_id not in obs.values]
    if not unobserved:
        raise NothingToAskError("every factor is already observed")

    current = infer(space, table, obs, kind)
    leader = current.leading_outcome

    if strategy == "random":
        factor = random.Random(seed).choice(unobserved)
    else:
        best_shift = -1.0
        factor = unobserved[0]
        for candidate in unobserved:
            shift = 0.0
            for value in candidate.values:
                pinned = obs.observe(candidate.factor_id, value.value_id)
                est = infer(space, table, pinned, kind)
                shift += abs(est.p_outcome1 - current.p_outcome1) / candidate.cardinality
            if shift > best_shift + DEFAULT_TIE_TOLERANCE:
                best_shift = shift
                factor = candidate

    value_id = _best_value_for_leader(factor, table, leader)
    value_text = next(v.text for v in factor.values if v.value_id == value_id)
    if rephrase is not None:
        question_text = rephrase(value_text)
    else:
        question_text = default_question_text(value_text)
    return FollowupQuestion(
        factor_id=factor.factor_id, value_id=value_id, question_text=question_text
    )


def apply_answer(
    obs: PartialObservation,
    question: FollowupQuestion,
    answer: bool,
    space: FactorSpace,
) -> PartialObservation:
    """Fold a yes/no answer to a follow-up question into the observation.

    Yes observes the targeted value. No on a binary factor observes the
    other value; no on a wider factor leaves it unobserved, since the
    answer does not say which alternative holds.
    """
    factor = space.factor_by_id(question.factor_id)
    factor.value_index(question.value_id)
    if question.factor_id in obs.values:
        raise AlreadyObservedError(
            f"factor {question.factor_id!r} is already observed"
        )
    if answer:
        return obs.observe(question.factor_id, question.value_id)
    if factor.cardinality == 2:
        other = next(
            v.value_id for v in factor.values if v.value_id != question.value_id
        )
        return obs.observe(question.factor_id, other)
    return obs
