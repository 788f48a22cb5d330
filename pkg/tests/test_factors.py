import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bird.errors import SpaceTooLargeError, ValidationError
from bird.factors import (
    CompleteAssignment,
    Factor,
    FactorSpace,
    FactorValue,
    PartialObservation,
    Scenario,
    Support,
    assignment_at,
    canonical_json,
    check_cap,
    consistent,
    enumerate_space,
    factor_space_to_json,
    parse_factor_space,
    sample_assignments,
)
from builders import make_scenario, make_space
from oracles import all_index_tuples


class TestScenario:
    def test_outcome_text(self):
        s = make_scenario()
        assert s.outcome_text(1) == s.outcome1
        assert s.outcome_text(2) == s.outcome2
        with pytest.raises(ValidationError):
            s.outcome_text(3)

    def test_rejects_blank_and_duplicate_outcomes(self):
        with pytest.raises(ValidationError):
            Scenario(id="", text="t", outcome1="a", outcome2="b")
        with pytest.raises(ValidationError):
            Scenario(id="s", text="  ", outcome1="a", outcome2="b")
        with pytest.raises(ValidationError):
            Scenario(id="s", text="t", outcome1="same", outcome2="same")


class TestFactor:
    def test_cardinality_and_value_index(self):
        space = make_space((3,))
        factor = space.factors[0]
        assert factor.cardinality == 3
        assert factor.value_index("f1v2") == 1
        with pytest.raises(ValidationError):
            factor.value_index("missing")

    def test_single_value_factor_rejected(self):
        with pytest.raises(ValidationError):
            Factor(
                factor_id="f1",
                name="lonely",
                values=(FactorValue(value_id="v", text="t", support=Support.NEUTRAL),),
            )

    def test_duplicate_value_ids_rejected(self):
        values = tuple(
            FactorValue(value_id="dup", text=f"t{i}", support=Support.NEUTRAL)
            for i in range(2)
        )
        with pytest.raises(ValidationError):
            Factor(factor_id="f1", name="n", values=values)

    def test_is_prunable(self):
        all_neutral = make_space((2,), supports=[Support.NEUTRAL, Support.NEUTRAL])
        assert all_neutral.factors[0].is_prunable
        one_sided = make_space((2,), supports=[Support.OUTCOME1, Support.OUTCOME1])
        assert one_sided.factors[0].is_prunable
        mixed = make_space((2,), supports=[Support.OUTCOME1, Support.NEUTRAL])
        assert not mixed.factors[0].is_prunable


class TestFactorSpace:
    def test_cardinality_is_product(self):
        assert make_space((2, 3, 4)).cardinality == 24

    def test_lookup_helpers(self):
        space = make_space((2, 2))
        assert space.factor_by_id("f2").name == "factor 2"
        assert space.factor_position("f2") == 1
        with pytest.raises(ValidationError):
            space.factor_by_id("f9")

    def test_duplicate_factor_ids_rejected(self):
        factor = make_space((2,)).factors[0]
        with pytest.raises(ValidationError):
            FactorSpace(scenario_id="s", factors=(factor, factor))

    def test_value_pairs_cover_everything_in_order(self):
        space = make_space((2, 3))
        pairs = [(f.factor_id, v.value_id) for f, v in space.value_pairs()]
        assert pairs == [
            ("f1", "f1v1"),
            ("f1", "f1v2"),
            ("f2", "f2v1"),
            ("f2", "f2v2"),
            ("f2", "f2v3"),
        ]


class TestEnumeration:
    def test_matches_recursive_oracle_order(self):
        space = make_space((2, 3, 2))
        got = [a.indices for a in enumerate_space(space)]
        assert got == all_index_tuples([2, 3, 2])

    def test_assignment_at_agrees_with_enumeration(self):
        space = make_space((3, 2, 4))
        listed = list(enumerate_space(space))
        for k, assignment in enumerate(listed):
            assert assignment_at(space, k) == assignment
        with pytest.raises(ValidationError):
            assignment_at(space, space.cardinality)

    def test_cap_enforced(self):
        space = make_space((4, 4, 4))
        with pytest.raises(SpaceTooLargeError) as err:
            check_cap(space, cap=63)
        assert err.value.cardinality == 64
        with pytest.raises(SpaceTooLargeError):
            list(enumerate_space(space, cap=63))


class TestSampling:
    def test_deterministic_per_seed(self):
        space = make_space((3, 3, 3))
        a = sample_assignments(space, 10, seed=7)
        b = sample_assignments(space, 10, seed=7)
        c = sample_assignments(space, 10, seed=8)
        assert a == b
        assert a != c

    def test_without_replacement_when_space_is_large_enough(self):
        space = make_space((4, 4))
        drawn = sample_assignments(space, 16, seed=0)
        assert len({a.indices for a in drawn}) == 16

    def test_with_replacement_when_space_is_small(self):
        space = make_space((2,))
        drawn = sample_assignments(space, 50, seed=0)
        assert len(drawn) == 50
        assert {a.indices for a in drawn} <= {(0,), (1,)}

    def test_rejects_nonpositive_count(self):
        with pytest.raises(ValidationError):
            sample_assignments(make_space((2,)), 0, seed=0)


class TestCompleteAssignment:
    def test_value_map_round_trip(self):
        space = make_space((2, 3))
        assignment = CompleteAssignment((1, 2))
        mapping = assignment.value_map(space)
        assert mapping == {"f1": "f1v2", "f2": "f2v3"}
        assert CompleteAssignment.from_value_ids(space, mapping) == assignment

    def test_validate_rejects_bad_shapes(self):
        space = make_space((2, 2))
        with pytest.raises(ValidationError):
            CompleteAssignment((0,)).validate(space)
        with pytest.raises(ValidationError):
            CompleteAssignment((0, 5)).validate(space)

    def test_from_value_ids_requires_every_factor(self):
        space = make_space((2, 2))
        with pytest.raises(ValidationError):
            CompleteAssignment.from_value_ids(space, {"f1": "f1v1"})


class TestPartialObservation:
    def test_observe_is_functional(self):
        obs = PartialObservation.empty()
        grown = obs.observe("f1", "f1v1")
        assert obs.is_empty
        assert grown.values == {"f1": "f1v1"}

    def test_merge_newer_wins(self):
        first = PartialObservation({"f1": "f1v1", "f2": "f2v1"})
        second = PartialObservation({"f1": "f1v2"})
        assert first.merge(second).values == {"f1": "f1v2", "f2": "f2v1"}

    def test_validate_against_space(self):
        space = make_space((2, 2))
        PartialObservation({"f1": "f1v2"}).validate(space)
        with pytest.raises(ValidationError):
            PartialObservation({"f1": "f9v9"}).validate(space)
        with pytest.raises(ValidationError):
            PartialObservation({"f9": "f1v1"}).validate(space)

    def test_consistent(self):
        space = make_space((2, 2))
        obs = PartialObservation({"f1": "f1v1"})
        assert consistent(space, CompleteAssignment((0, 0)), obs)
        assert consistent(space, CompleteAssignment((0, 1)), obs)
        assert not consistent(space, CompleteAssignment((1, 0)), obs)


class TestSerialization:
    def test_round_trip(self):
        scenario = make_scenario("demo-cord")
        space = make_space((2, 3), scenario_id="demo-cord")
        doc = factor_space_to_json(scenario, space)
        parsed_scenario, parsed_space = parse_factor_space(doc)
        assert parsed_scenario == scenario
        assert parsed_space == space
        again = factor_space_to_json(parsed_scenario, parsed_space)
        assert canonical_json(again) == canonical_json(doc)

    def test_parse_accepts_json_text(self):
        scenario = make_scenario()
        space = make_space((2,))
        text = canonical_json(factor_space_to_json(scenario, space))
        parsed_scenario, parsed_space = parse_factor_space(text)
        assert parsed_space == space

    def test_parse_rejects_malformed(self):
        with pytest.raises(ValidationError):
            parse_factor_space("{not json")
        with pytest.raises(ValidationError):
            parse_factor_space({"factors": []})

    def test_canonical_json_is_stable(self):
        doc = {"b": 1, "a": [1.5, "café"]}
        assert canonical_json(doc) == canonical_json(dict(doc))
        assert canonical_json(doc).endswith("\n")
        assert "café" in canonical_json(doc)


@settings(max_examples=60, deadline=None)
@given(
    cards=st.lists(st.integers(min_value=2, max_value=4), min_size=1, max_size=4),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_sampled_assignments_always_validate(cards, seed):
    space = make_space(tuple(cards))
    for assignment in sample_assignments(space, 8, seed=seed):
        assignment.validate(space)


@settings(max_examples=40, deadline=None)
@given(cards=st.lists(st.integers(min_value=2, max_value=4), min_size=1, max_size=4))
def test_enumeration_is_exhaustive_and_distinct(cards):
    space = make_space(tuple(cards))
    seen = {a.indices for a in enumerate_space(space)}
    assert len(seen) == space.cardinality


def test_enumeration_weight_identity():
    # Uniform weights over any sub-enumeration sum to 1: the base fact the
    # marginalization tests lean on.
    space = make_space((3, 2, 2))
    obs = PartialObservation({"f1": "f1v2"})
    total = sum(
        1.0 / (2 * 2)
        for a in enumerate_space(space)
        if consistent(space, a, obs)
    )
    assert abs(total - 1.0) < 1e-12
