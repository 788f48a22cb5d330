"""Regenerate the committed fixtures under fixtures/.

Run from the repository root:

    python3 tools/make_golden.py

The script drives the real pipeline against a scripted provider, records
every completion into replayable llm_cache.v1 transcripts, then replays
the whole chain from the transcripts alone to confirm they are
self-contained before writing the outputs. Editing the prompt templates
changes the request digests, so the transcripts must be regenerated
whenever v1 templates change.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from bird.bundle import (
    Provenance,
    ScenarioBundle,
    bundle_to_json,
    estimate_to_json,
    parse_bundle,
    scenario_to_json,
)
from bird.engine import infer
from bird.factors import (
    Factor,
    FactorSpace,
    FactorValue,
    PartialObservation,
    Scenario,
    Support,
    canonical_json,
    sample_assignments,
)
from bird.llm import LLM_CACHE_SCHEMA, CompletionRequest, CompletionResponse, FixtureProvider, FixtureStore
from bird.pipeline import (
    AbductionConfig,
    EntailmentConfig,
    abduce,
    classify_and_prune,
    elicit_targets,
    entail,
    rephrase_question,
)
from bird.pool import ProbabilityTable
from bird.trainer import TrainingConfig, train

DEMO_DIR = ROOT / "fixtures" / "demo"
GOLDEN_DIR = ROOT / "fixtures" / "golden"
EVAL_DIR = ROOT / "fixtures" / "eval"


class ScriptedProvider:
    """Deterministic stand-in for a model, recording every completion.

    respond(prompt, n) must return exactly n texts and must be a pure
    function of its arguments; repeated requests for the same digest are
    checked for consistency so the recorded transcript replays cleanly
    through a round-robin fixture store.
    """

    provider_id = "scripted"

    def __init__(self, respond):
        self._respond = respond
        self.records: dict[str, dict] = {}

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        texts = list(self._respond(request.prompt, request.n))
        if len(texts) != request.n:
            raise AssertionError(
                f"script returned {len(texts)} texts for n={request.n}:\n{request.prompt}"
            )
        digest = request.digest
        if digest in self.records:
            if self.records[digest]["texts"] != texts:
                raise AssertionError(f"script is not deterministic for digest {digest}")
        else:
            self.records[digest] = {
                "schema": LLM_CACHE_SCHEMA,
                "digest": digest,
                "prompt": request.prompt,
                "temperature": request.temperature,
                "texts": texts,
            }
        return CompletionResponse(texts=tuple(texts), provider_id=self.provider_id)

    def dump(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            for record in self.records.values():
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(doc), encoding="utf-8")


# ---------------------------------------------------------------------------
# Golden scenario: a full abduce -> classify -> entail -> elicit -> train run.

GOLDEN_SCENARIO = Scenario(
    id="golden-umbrella",
    text="You are heading out for a short walk to the corner store.",
    outcome1="Take an umbrella",
    outcome2="Leave the umbrella at home",
)

SENTENCES_O1 = [
    "Dark clouds are gathering overhead.",
    "The forecast warns of rain this afternoon.",
    "The pavement is already wet from an earlier shower.",
    "You hear distant thunder as you put on your shoes.",
    "The air feels heavy and humid.",
    "Your neighbor walks past carrying an open umbrella.",
    "The store is a twenty minute walk away.",
    "You are wearing clothes that must stay dry.",
    "Rain started during your walk yesterday.",
    "The weather app shows a storm cell moving toward you.",
]

SENTENCES_O2 = [
    "The sky is clear and blue.",
    "The forecast promises a dry day.",
    "Your hands are full with shopping bags.",
    "The store is just around the corner.",
    "You dislike carrying things you might not use.",
    "The sun has been out all morning.",
    "You plan to take the covered arcade most of the way.",
    "Your umbrella is broken and barely opens.",
    "It has not rained in weeks.",
    "You can borrow an umbrella at the store if needed.",
]

GOLDEN_SUMMARY = """Factor 1: Sky condition
- Dark clouds are gathering overhead
- The sky is clear and blue

Factor 2: Forecast
- The forecast warns of rain this afternoon
- The forecast promises a dry day

Factor 3: Carrying load
- Your hands are full with shopping bags
- You are walking with both hands free

Factor 4: Shoe color
- You are wearing black shoes
- You are wearing white shoes"""

# Three classification votes per value; the shoe factor is all neutral and
# must be pruned.
GOLDEN_VOTES = {
    "Dark clouds are gathering overhead": ["outcome 1", "outcome 1", "outcome 1"],
    "The sky is clear and blue": ["outcome 2", "outcome 2", "outcome 2"],
    "The forecast warns of rain this afternoon": ["outcome 1", "outcome 1", "neutral"],
    "The forecast promises a dry day": ["outcome 2", "outcome 2", "outcome 2"],
    "Your hands are full with shopping bags": ["outcome 2", "outcome 2", "outcome 2"],
    "You are walking with both hands free": ["neutral", "neutral", "neutral"],
    "You are wearing black shoes": ["neutral", "neutral", "neutral"],
    "You are wearing white shoes": ["neutral", "neutral", "neutral"],
}

GOLDEN_CONDITION = "Thick gray clouds hang low over the street and your hands are free."

# Entailment answers for the golden condition, keyed by prompt kind.
GOLDEN_ENTAIL_FACTORS = "1, 3"
GOLDEN_ENTAIL_VALUE = {"Sky condition": "1", "Carrying load": "2"}
GOLDEN_ENTAIL_DIRECT_YES = {
    "Dark clouds are gathering overhead",
    "You are walking with both hands free",
}

# Verbalized elicitation: score complete information by how many of its
# statements favor each outcome, then read off a confidence level.
VALUE_SCORES = {
    "Dark clouds are gathering overhead": 1,
    "The sky is clear and blue": -1,
    "The forecast warns of rain this afternoon": 1,
    "The forecast promises a dry day": -1,
    "Your hands are full with shopping bags": -1,
    "You are walking with both hands free": 0,
}


def level_for_score(score: int) -> str:
    if score >= 2:
        return "very likely"
    if score == 1:
        return "likely"
    if score == 0:
        return "neutral"
    if score == -1:
        return "unlikely"
    return "very unlikely"


def extract_block(prompt: str, header: str) -> list[str]:
    """The '- ' lines that follow a 'header' line in a prompt."""
    lines = prompt.splitlines()
    items: list[str] = []
    active = False
    for line in lines:
        if line.strip() == header:
            active = True
            continue
        if active:
            if line.startswith("- "):
                items.append(line[2:].strip())
            elif line.strip() == "" and items:
                break
    return items


def golden_respond(prompt: str, n: int) -> list[str]:
    if "Generate 10 sentences" in prompt:
        if f'choosing "{GOLDEN_SCENARIO.outcome1}"' in prompt:
            return ["\n".join(SENTENCES_O1)] * n
        if f'choosing "{GOLDEN_SCENARIO.outcome2}"' in prompt:
            return ["\n".join(SENTENCES_O2)] * n
        raise AssertionError(f"unexpected sentence prompt:\n{prompt}")
    if "Summarize these sentences" in prompt:
        return [GOLDEN_SUMMARY] * n
    if "Decide which outcome this information better supports" in prompt:
        for value, votes in GOLDEN_VOTES.items():
            if f"Information: {value}" in prompt:
                return votes[:n]
        raise AssertionError(f"unexpected classification prompt:\n{prompt}")
    if "Which factors does the scenario together with the condition" in prompt:
        return [GOLDEN_ENTAIL_FACTORS] * n
    if "Which single value does the scenario together with the condition" in prompt:
        for name, answer in GOLDEN_ENTAIL_VALUE.items():
            if f"Factor: {name}" in prompt:
                return [answer] * n
        return ["none"] * n
    if "Does the scenario together with the condition imply this statement?" in prompt:
        for value in GOLDEN_ENTAIL_DIRECT_YES:
            if f"Statement: {value}" in prompt:
                return ["yes"] * n
        return ["no"] * n
    if "how likely is outcome 1" in prompt:
        statements = extract_block(prompt, "Complete information:")
        score = sum(VALUE_SCORES[s] for s in statements)
        return [level_for_score(score)] * n
    raise AssertionError(f"no golden rule for prompt:\n{prompt}")


def run_golden_chain(provider) -> tuple[ScenarioBundle, dict]:
    """The full deterministic chain against any provider."""
    draft = abduce(provider, GOLDEN_SCENARIO, AbductionConfig())
    space, verdicts = classify_and_prune(provider, GOLDEN_SCENARIO, draft.space)
    config = TrainingConfig()
    assignments = sample_assignments(space, config.sample_count, config.seed)
    targets = elicit_targets(provider, GOLDEN_SCENARIO, space, assignments)
    result = train(space, targets, config)
    bundle = ScenarioBundle(
        scenario=GOLDEN_SCENARIO,
        space=space,
        verdicts=verdicts,
        table=result.table,
        loss_trace=result.loss_trace,
        train_config=config,
        provenance=Provenance(provider_id="fixture", seed=config.seed),
    )
    # Infer from the wire-rounded bundle so the estimate matches what a
    # reader of bundle.json reproduces, not the full-precision table.
    bundle = parse_bundle(bundle_to_json(bundle))
    obs = entail(provider, GOLDEN_SCENARIO, GOLDEN_CONDITION, space, EntailmentConfig())
    estimate = infer(bundle.space, bundle.table, obs)
    return bundle, estimate_to_json(estimate, bundle.space)


def make_golden() -> None:
    scripted = ScriptedProvider(golden_respond)
    bundle, estimate_doc = run_golden_chain(scripted)
    scripted.dump(GOLDEN_DIR / "transcript.jsonl")

    replay = FixtureProvider(FixtureStore.from_file(GOLDEN_DIR / "transcript.jsonl"))
    replay_bundle, replay_doc = run_golden_chain(replay)
    if canonical_json(bundle_to_json(bundle)) != canonical_json(bundle_to_json(replay_bundle)):
        raise AssertionError("golden transcript does not replay to the same bundle")
    if canonical_json(estimate_doc) != canonical_json(replay_doc):
        raise AssertionError("golden transcript does not replay to the same estimate")

    write_json(GOLDEN_DIR / "scenario.json", scenario_to_json(GOLDEN_SCENARIO))
    write_json(GOLDEN_DIR / "bundle.json", bundle_to_json(bundle))
    write_json(GOLDEN_DIR / "estimate.json", estimate_doc)
    (GOLDEN_DIR / "condition.txt").write_text(GOLDEN_CONDITION + "\n", encoding="utf-8")
    print(f"golden: {bundle.space.cardinality} assignments, estimate p1={estimate_doc['p_outcome1']}")


# ---------------------------------------------------------------------------
# Demo scenario: a hand-set table whose inference values are easy to check.

DEMO_SCENARIO = Scenario(
    id="demo-cord",
    text="You want to charge your phone while still using it.",
    outcome1="Choose the longer cord",
    outcome2="Choose the shorter cord",
)

DEMO_SPACE = FactorSpace(
    scenario_id="demo-cord",
    factors=(
        Factor(
            factor_id="f1",
            name="Movement while charging",
            values=(
                FactorValue(
                    value_id="f1v1",
                    text="You will walk around the room while the phone charges",
                    support=Support.OUTCOME1,
                ),
                FactorValue(
                    value_id="f1v2",
                    text="You will stay seated next to the outlet",
                    support=Support.OUTCOME2,
                ),
            ),
        ),
        Factor(
            factor_id="f2",
            name="Distance to the outlet",
            values=(
                FactorValue(
                    value_id="f2v1",
                    text="The outlet is far from where you use the phone",
                    support=Support.OUTCOME1,
                ),
                FactorValue(
                    value_id="f2v2",
                    text="The outlet is within arm's reach",
                    support=Support.NEUTRAL,
                ),
            ),
        ),
    ),
)

DEMO_TABLE = {
    ("f1", "f1v1"): 0.75,
    ("f1", "f1v2"): 0.25,
    ("f2", "f2v1"): 0.75,
    ("f2", "f2v2"): 0.5,
}

# Condition -> factor values a strict majority of entailment passes implies.
# The first two are different phrasings of the same situation on purpose.
DEMO_CONDITIONS = {
    "You will be walking around the room.": {"f1": "f1v1"},
    "You plan to wander around with the phone in hand.": {"f1": "f1v1"},
    "You pace around the room and the outlet is far away.": {"f1": "f1v1", "f2": "f2v1"},
    "The phone case is red.": {},
    "You will stay seated next to the outlet.": {"f1": "f1v2"},
}

DEMO_QUESTIONS = {
    "You will walk around the room while the phone charges": (
        "Will you walk around the room while the phone charges?"
    ),
    "You will stay seated next to the outlet": (
        "Will you stay seated next to the outlet?"
    ),
    "The outlet is far from where you use the phone": (
        "Is the outlet far from where you use the phone?"
    ),
    "The outlet is within arm's reach": "Is the outlet within arm's reach?",
}


def demo_respond(prompt: str, n: int) -> list[str]:
    space = DEMO_SPACE
    condition = None
    for text in DEMO_CONDITIONS:
        if f"Condition: {text}" in prompt:
            condition = text
            break
    if condition is not None:
        implied = DEMO_CONDITIONS[condition]
        if "Which factors does the scenario together with the condition" in prompt:
            positions = [
                str(i + 1)
                for i, factor in enumerate(space.factors)
                if factor.factor_id in implied
            ]
            return [", ".join(positions) if positions else "none"] * n
        if "Which single value does the scenario together with the condition" in prompt:
            for factor in space.factors:
                if f"Factor: {factor.name}" not in prompt:
                    continue
                value_id = implied.get(factor.factor_id)
                if value_id is None:
                    return ["none"] * n
                position = [v.value_id for v in factor.values].index(value_id) + 1
                return [str(position)] * n
            raise AssertionError(f"unexpected factor in prompt:\n{prompt}")
        if "Does the scenario together with the condition imply this statement?" in prompt:
            for factor in space.factors:
                for value in factor.values:
                    if f"Statement: {value.text}" in prompt:
                        answer = implied.get(factor.factor_id) == value.value_id
                        return ["yes" if answer else "no"] * n
            raise AssertionError(f"unexpected statement in prompt:\n{prompt}")
    if "Rewrite the following statement as a yes/no question" in prompt:
        for statement, question in DEMO_QUESTIONS.items():
            if f"Statement: {statement}" in prompt:
                return [question] * n
        raise AssertionError(f"unexpected rephrase prompt:\n{prompt}")
    raise AssertionError(f"no demo rule for prompt:\n{prompt}")


def make_demo() -> None:
    space = DEMO_SPACE
    table = ProbabilityTable.for_space(space, DEMO_TABLE)
    bundle = ScenarioBundle(
        scenario=DEMO_SCENARIO,
        space=space,
        table=table,
        provenance=Provenance(provider_id="fixture", seed=0),
    )
    write_json(DEMO_DIR / "scenario.json", scenario_to_json(DEMO_SCENARIO))
    write_json(DEMO_DIR / "bundle.json", bundle_to_json(bundle))

    scripted = ScriptedProvider(demo_respond)
    for condition, implied in DEMO_CONDITIONS.items():
        obs = entail(scripted, DEMO_SCENARIO, condition, space)
        if obs.values != implied:
            raise AssertionError(f"{condition!r} entailed {obs.values}, wanted {implied}")
    for factor, value in space.value_pairs():
        question = rephrase_question(scripted, value.text)
        if question != DEMO_QUESTIONS[value.text]:
            raise AssertionError(f"unexpected question for {value.text!r}")
    scripted.dump(DEMO_DIR / "transcript.jsonl")

    replay = FixtureProvider(FixtureStore.from_file(DEMO_DIR / "transcript.jsonl"))
    for condition, implied in DEMO_CONDITIONS.items():
        obs = entail(replay, DEMO_SCENARIO, condition, space)
        if obs.values != implied:
            raise AssertionError(f"replay of {condition!r} entailed {obs.values}")

    config = {
        "provider": "fixture",
        "fixture_paths": ["fixtures/demo/transcript.jsonl"],
        "bundle_paths": ["fixtures/demo/bundle.json"],
        "question_seed": 0,
    }
    write_json(DEMO_DIR / "config.json", config)

    estimates = {}
    for condition, implied in DEMO_CONDITIONS.items():
        obs = PartialObservation(values=implied)
        estimates[condition] = infer(space, table, obs)
    for condition, estimate in estimates.items():
        print(f"demo: {condition!r} -> p1={estimate.p_outcome1:.12g} {estimate.verdict.value}")


def make_eval() -> None:
    """Small labeled datasets phrased over the demo conditions."""
    walk = "You will be walking around the room."
    far = "You pace around the room and the outlet is far away."
    red = "The phone case is red."
    seated = "You will stay seated next to the outlet."

    pairwise = [
        {
            "schema": "pairwise_eval.v1",
            "scenario_id": "demo-cord",
            "condition1": walk,
            "condition2": far,
            "target_outcome": 1,
            "gold": "condition2",
        },
        {
            "schema": "pairwise_eval.v1",
            "scenario_id": "demo-cord",
            "condition1": walk,
            "condition2": seated,
            "target_outcome": 1,
            "gold": "condition1",
        },
        {
            "schema": "pairwise_eval.v1",
            "scenario_id": "demo-cord",
            "condition1": red,
            "condition2": red,
            "target_outcome": 1,
            "gold": "same",
        },
    ]
    decisions = [
        {
            "schema": "decision_eval.v1",
            "scenario_id": "demo-cord",
            "condition": walk,
            "gold_outcome": 1,
        },
        {
            "schema": "decision_eval.v1",
            "scenario_id": "demo-cord",
            "condition": seated,
            "gold_outcome": 2,
        },
        {
            "schema": "decision_eval.v1",
            "scenario_id": "demo-cord",
            "condition": red,
            "gold_outcome": 1,
        },
    ]
    EVAL_DIR.mkdir(parents=True, exist_ok=True)
    with (EVAL_DIR / "pairwise_demo.jsonl").open("w", encoding="utf-8") as handle:
        for record in pairwise:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    with (EVAL_DIR / "decisions_demo.jsonl").open("w", encoding="utf-8") as handle:
        for record in decisions:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"eval: {len(pairwise)} pairwise, {len(decisions)} decision records")


if __name__ == "__main__":
    make_golden()
    make_demo()
    make_eval()
    print("fixtures written")
