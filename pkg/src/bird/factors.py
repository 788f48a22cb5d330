"""Scenario, factor, and complete-information-space domain types.

A scenario poses a binary decision between two complementary outcomes.
Factors are discrete variables abduced from the scenario; the product of
their value sets is the complete-information space. Everything here is
immutable after construction, assignments are index vectors over the fixed
factor order (text only lives at the pipeline boundary), and enumeration
and sampling are deterministic so serialized artifacts and test goldens
stay stable.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterator, Mapping

from .errors import SpaceTooLargeError, ValidationError

# Enumeration refuses to touch spaces larger than this; the intended
# scenarios have a handful of factors, so anything bigger is a bug.
DEFAULT_SPACE_CAP = 1 << 20


class Support(Enum):
    """Which outcome a factor value was classified as supporting."""

    OUTCOME1 = "outcome1"
    OUTCOME2 = "outcome2"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class Scenario:
    """A decision situation with two complementary outcomes."""

    id: str
    text: str
    outcome1: str
    outcome2: str

    def __post_init__(self):
        if not self.id:
            raise ValidationError("scenario id must be non-empty")
        if not self.text.strip():
            raise ValidationError("scenario text must be non-empty")
        if not self.outcome1.strip() or not self.outcome2.strip():
            raise ValidationError("both outcomes must be non-empty")
        if self.outcome1 == self.outcome2:
            raise ValidationError("outcomes must differ")

    def outcome_text(self, outcome: int) -> str:
        if outcome == 1:
            return self.outcome1
        if outcome == 2:
            return self.outcome2
        raise ValidationError(f"outcome must be 1 or 2, got {outcome}")


@dataclass(frozen=True)
class Condition:
    """Additional partial information attached to a scenario."""

    id: str
    text: str
    scenario_id: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError("condition text must be non-empty")


@dataclass(frozen=True)
class FactorValue:
    """One possible value of a factor, with its classified support label."""

    value_id: str
    text: str
    support: Support = Support.NEUTRAL

    def __post_init__(self):
        if not self.value_id:
            raise ValidationError("value_id must be non-empty")
        if not isinstance(self.support, Support):
            raise ValidationError(f"invalid support label: {self.support!r}")


@dataclass(frozen=True)
class Factor:
    """A discrete variable with at least two distinct values."""

    factor_id: str
    name: str
    values: tuple[FactorValue, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.factor_id:
            raise ValidationError("factor_id must be non-empty")
        if len(self.values) < 2:
            raise ValidationError(
                f"factor {self.factor_id!r} needs at least 2 values, "
                f"got {len(self.values)}"
            )
        ids = [v.value_id for v in self.values]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate value_ids in factor {self.factor_id!r}")

    @property
    def cardinality(self) -> int:
        return len(self.values)

    def value_index(self, value_id: str) -> int:
        for i, v in enumerate(self.values):
            if v.value_id == value_id:
                return i
        raise ValidationError(
            f"factor {self.factor_id!r} has no value {value_id!r}"
        )

    @property
    def is_prunable(self) -> bool:
        """True when every value carries the same support label."""
        return len({v.support for v in self.values}) == 1


@dataclass(frozen=True)
class FactorSpace:
    """The ordered factors of a scenario; their value sets multiply into
    the complete-information space.

    Factor order is fixed at construction and used for assignment
    encoding and enumeration order everywhere downstream.
    """

    scenario_id: str
    factors: tuple[Factor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 1:
            raise ValidationError("a factor space needs at least one factor")
        ids = [f.factor_id for f in self.factors]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate factor_ids in space")

    @property
    def cardinality(self) -> int:
        """Exact product of value-set sizes (arbitrary-precision int)."""
        n = 1
        for f in self.factors:
            n *= f.cardinality
        return n

    def factor_by_id(self, factor_id: str) -> Factor:
        for f in self.factors:
            if f.factor_id == factor_id:
                return f
        raise ValidationError(f"no factor {factor_id!r} in space")

    def factor_position(self, factor_id: str) -> int:
        for i, f in enumerate(self.factors):
            if f.factor_id == factor_id:
                return i
        raise ValidationError(f"no factor {factor_id!r} in space")

    def value_pairs(self) -> Iterator[tuple[Factor, FactorValue]]:
        """All (factor, value) pairs in factor order."""
        for f in self.factors:
            for v in f.values:
                yield f, v


@dataclass(frozen=True)
class CompleteAssignment:
    """One fully specified world: a value index per factor, in factor order."""

    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))

    def validate(self, space: FactorSpace) -> None:
        if len(self.indices) != len(space.factors):
            raise ValidationError(
                f"assignment has {len(self.indices)} entries for "
                f"{len(space.factors)} factors"
            )
        for idx, f in zip(self.indices, space.factors):
            if not 0 <= idx < f.cardinality:
                raise ValidationError(
                    f"index {idx} out of range for factor {f.factor_id!r}"
                )

    def values(self, space: FactorSpace) -> tuple[FactorValue, ...]:
        return tuple(
            f.values[idx] for f, idx in zip(space.factors, self.indices)
        )

    def value_ids(self, space: FactorSpace) -> tuple[str, ...]:
        return tuple(v.value_id for v in self.values(space))

    def value_map(self, space: FactorSpace) -> dict[str, str]:
        return {
            f.factor_id: f.values[idx].value_id
            for f, idx in zip(space.factors, self.indices)
        }

    @classmethod
    def from_value_ids(
        cls, space: FactorSpace, value_ids: Mapping[str, str]
    ) -> "CompleteAssignment":
        if set(value_ids) != {f.factor_id for f in space.factors}:
            raise ValidationError("assignment must name every factor exactly once")
        return cls(
            tuple(
                f.value_index(value_ids[f.factor_id]) for f in space.factors
            )
        )


@dataclass(frozen=True)
class PartialObservation:
    """The factor values a context entails: factor_id -> value_id.

    Unmapped factors are unobserved. May be empty, which downstream
    inference reports as an unknown verdict.
    """

    values: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    @classmethod
    def empty(cls) -> "PartialObservation":
        return cls({})

    @property
    def is_empty(self) -> bool:
        return not self.values

    def observe(self, factor_id: str, value_id: str) -> "PartialObservation":
        merged = dict(self.values)
        merged[factor_id] = value_id
        return PartialObservation(merged)

    def merge(self, other: "PartialObservation") -> "PartialObservation":
        """Combine two observations; on conflict the newer value wins."""
        merged = dict(self.values)
        merged.update(other.values)
        return PartialObservation(merged)

    def validate(self, space: FactorSpace) -> None:
        for factor_id, value_id in self.values.items():
            space.factor_by_id(factor_id).value_index(value_id)

    def to_json(self) -> dict[str, str]:
        return dict(self.values)


def check_cap(space: FactorSpace, cap: int = DEFAULT_SPACE_CAP) -> None:
    if space.cardinality > cap:
        raise SpaceTooLargeError(space.cardinality, cap)


def enumerate_space(
    space: FactorSpace, *, cap: int = DEFAULT_SPACE_CAP
) -> Iterator[CompleteAssignment]:
    """Yield every complete assignment exactly once.

    Order is lexicographic over value indices with the first factor most
    significant, i.e. the nested-loop order over factors as declared.
    """
    check_cap(space, cap)
    for indices in itertools.product(*(range(f.cardinality) for f in space.factors)):
        yield CompleteAssignment(indices)


def assignment_at(space: FactorSpace, index: int) -> CompleteAssignment:
    """The index-th assignment in enumeration order (mixed-radix decode)."""
    if not 0 <= index < space.cardinality:
        raise ValidationError(f"assignment index {index} out of range")
    digits = []
    for f in reversed(space.factors):
        index, digit = divmod(index, f.cardinality)
        digits.append(digit)
    return CompleteAssignment(tuple(reversed(digits)))


def sample_assignments(
    space: FactorSpace, n: int, seed: int, *, cap: int = DEFAULT_SPACE_CAP
) -> list[CompleteAssignment]:
    """Draw n assignments, reproducibly for a fixed seed.

    When the space holds at least n assignments the draw is without
    replacement; smaller spaces are resampled with replacement until n
    assignments are collected.
    """
    if n < 1:
        raise ValidationError(f"sample count must be >= 1, got {n}")
    check_cap(space, cap)
    rng = random.Random(seed)
    card = space.cardinality
    if card >= n:
        picks = rng.sample(range(card), n)
    else:
        picks = [rng.randrange(card) for _ in range(n)]
    return [assignment_at(space, k) for k in picks]


def consistent(
    space: FactorSpace, assignment: CompleteAssignment, obs: PartialObservation
) -> bool:
    """True iff the assignment agrees with every observed factor value."""
    assignment.validate(space)
    for factor_id, value_id in obs.values.items():
        pos = space.factor_position(factor_id)
        want = space.factors[pos].value_index(value_id)
        if assignment.indices[pos] != want:
            return False
    return True


# ---------------------------------------------------------------------------
# factor_space.v1 serialization
# ---------------------------------------------------------------------------
#
# {scenario: {id, text, outcome1, outcome2},
#  factors: [{factor_id, name, values: [{value_id, text, support}]}]}
#
# parse -> serialize round-trips byte-stably (canonical key order,
# fixed separators, trailing newline).


def factor_space_to_json(scenario: Scenario, space: FactorSpace) -> dict:
    return {
        "scenario": {
            "id": scenario.id,
            "text": scenario.text,
            "outcome1": scenario.outcome1,
            "outcome2": scenario.outcome2,
        },
        "factors": [
            {
                "factor_id": f.factor_id,
                "name": f.name,
                "values": [
                    {
                        "value_id": v.value_id,
                        "text": v.text,
                        "support": v.support.value,
                    }
                    for v in f.values
                ],
            }
            for f in space.factors
        ],
    }


def parse_factor_space(doc: dict | str) -> tuple[Scenario, FactorSpace]:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
    try:
        s = doc["scenario"]
        scenario = Scenario(
            id=s["id"], text=s["text"], outcome1=s["outcome1"], outcome2=s["outcome2"]
        )
        factors = tuple(
            Factor(
                factor_id=f["factor_id"],
                name=f["name"],
                values=tuple(
                    FactorValue(
                        value_id=v["value_id"],
                        text=v["text"],
                        support=Support(v["support"]),
                    )
                    for v in f["values"]
                ),
            )
            for f in doc["factors"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed factor_space.v1 document: {exc}") from exc
    return scenario, FactorSpace(scenario_id=scenario.id, factors=factors)


def canonical_json(doc) -> str:
    """Serialize with a stable byte representation (insertion key order,
    fixed separators, no ASCII escaping, trailing newline)."""
    return json.dumps(doc, ensure_ascii=False, separators=(", ", ": "), indent=1) + "\n"
