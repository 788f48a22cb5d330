"""LLM-backed procedures around the factor model.

Abduction proposes factors for a scenario in two stages (sample sentences
favoring each outcome, then summarize them into factors with values);
classification labels every value with the outcome it supports and prunes
factors whose values all agree; entailment maps a condition onto observed
factor values by majority over hierarchy and direct prompt passes;
elicitation turns sampled complete assignments into verbal-probability
training targets. The verbalization baselines live here too.

All prompts are rendered from the versioned templates in bird/prompts; all
parsers are closed-vocabulary and raise instead of defaulting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from string import Template
from typing import Sequence

from .engine import PairwiseChoice, default_question_text
from .errors import ParseError, ValidationError
from .factors import (
    CompleteAssignment,
    Factor,
    FactorSpace,
    FactorValue,
    PartialObservation,
    Scenario,
    Support,
)
from .llm import DEFAULT_TEMPERATURE, CompletionRequest, Provider
from .trainer import TrainingSample

PROMPT_VERSION = "v1"

# Verbal probability levels and their fixed numeric values.
VERBAL_LEVELS: dict[str, float] = {
    "very unlikely": 0.0,
    "unlikely": 0.2,
    "somewhat unlikely": 0.4,
    "neutral": 0.5,
    "somewhat likely": 0.6,
    "likely": 0.8,
    "very likely": 1.0,
}


class VerbalLevel(Enum):
    VERY_UNLIKELY = "very unlikely"
    UNLIKELY = "unlikely"
    SOMEWHAT_UNLIKELY = "somewhat unlikely"
    NEUTRAL = "neutral"
    SOMEWHAT_LIKELY = "somewhat likely"
    LIKELY = "likely"
    VERY_LIKELY = "very likely"

    @property
    def probability(self) -> float:
        return VERBAL_LEVELS[self.value]


_TEMPLATE_CACHE: dict[str, Template] = {}


def render_prompt(name: str, **slots: str) -> str:
    """Fill a named template; every slot must be supplied."""
    template = _TEMPLATE_CACHE.get(name)
    if template is None:
        path = resources.files("bird.prompts").joinpath(PROMPT_VERSION).joinpath(f"{name}.txt")
        try:
            template = Template(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError(f"no prompt template named {name!r}") from None
        _TEMPLATE_CACHE[name] = template
    try:
        return template.substitute(**slots)
    except KeyError as exc:
        raise ValidationError(f"template {name!r} is missing slot {exc.args[0]!r}") from None


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip().lower()


def _find_level_phrases(text: str) -> list[str]:
    """Distinct verbal levels mentioned in the text, longest phrases first
    so 'somewhat likely' is never double-counted as 'likely'."""
    normalized = _normalize(text)
    taken: list[tuple[int, int]] = []
    found: list[str] = []
    for phrase in sorted(VERBAL_LEVELS, key=len, reverse=True):
        for match in re.finditer(rf"\b{re.escape(phrase)}\b", normalized):
            span = match.span()
            if any(span[0] < hi and lo < span[1] for lo, hi in taken):
                continue
            taken.append(span)
            if phrase not in found:
                found.append(phrase)
    return found


def parse_verbal_level(text: str) -> VerbalLevel:
    """Map a response onto one of the seven levels.

    Case and punctuation tolerant, but closed-vocabulary: no level phrase,
    or more than one distinct level phrase, is an error.
    """
    found = _find_level_phrases(text)
    if len(found) != 1:
        raise ParseError(
            f"expected exactly one verbal probability level, found {found or 'none'} "
            f"in {text!r}"
        )
    return VerbalLevel(found[0])


@dataclass(frozen=True)
class AbductionConfig:
    sentences_per_outcome: int = 10
    temperature: float = DEFAULT_TEMPERATURE
    direct: bool = False
    max_parse_retries: int = 2

    def __post_init__(self):
        if self.sentences_per_outcome < 1:
            raise ValidationError("sentences_per_outcome must be at least 1")
        if self.max_parse_retries < 0:
            raise ValidationError("max_parse_retries must be nonnegative")


@dataclass(frozen=True)
class AbductionDraft:
    """Intermediates of factor generation, kept for inspection."""

    sentences1: tuple[str, ...]
    sentences2: tuple[str, ...]
    summary_text: str
    space: FactorSpace


@dataclass(frozen=True)
class ClassificationVerdict:
    factor_id: str
    value_id: str
    votes: tuple[Support, ...]
    decided: Support


@dataclass(frozen=True)
class EntailmentConfig:
    """How many entailment passes to run and how many use the hierarchy
    prompt; the remainder use the direct prompt."""

    total_samples: int = 3
    hierarchy_count: int = 2

    def __post_init__(self):
        if self.total_samples < 1:
            raise ValidationError("total_samples must be at least 1")
        if not 0 <= self.hierarchy_count <= self.total_samples:
            raise ValidationError("hierarchy_count must be within total_samples")


class BaselineMode(Enum):
    VANILLA = "vanilla"
    COT = "cot"
    EC = "ec"


@dataclass(frozen=True)
class BaselineResult:
    mode: BaselineMode
    samples: tuple[str, ...]
    p_outcome1: float | None = None
    choice: PairwiseChoice | None = None


def _sentence_lines(text: str) -> list[str]:
    lines = []
    for raw in text.splitlines():
        line = re.sub(r"^\s*(?:[-*]|\d+[.)])\s*", "", raw).strip()
        if line:
            lines.append(line)
    return lines


_FACTOR_HEAD = re.compile(r"^\s*factor\s*\d*\s*:\s*(.+?)\s*$", re.IGNORECASE)
_VALUE_LINE = re.compile(r"^\s*[-*]\s*(.+?)\s*$")


def parse_factor_blocks(text: str) -> list[tuple[str, list[str]]]:
    """Parse 'Factor N: name' blocks with '- value' lines into (name, values)."""
    blocks: list[tuple[str, list[str]]] = []
    for raw in text.splitlines():
        head = _FACTOR_HEAD.match(raw)
        if head:
            blocks.append((head.group(1), []))
            continue
        value = _VALUE_LINE.match(raw)
        if value:
            if not blocks:
                raise ParseError("value line before any factor header")
            blocks[-1][1].append(value.group(1))
    if not blocks:
        raise ParseError("no factor blocks found in summarization output")
    for name, values in blocks:
        if len(values) < 2:
            raise ParseError(f"factor {name!r} needs at least two values")
    return blocks


def _space_from_blocks(scenario: Scenario, blocks: list[tuple[str, list[str]]]) -> FactorSpace:
    factors = []
    for i, (name, values) in enumerate(blocks, start=1):
        factor_id = f"f{i}"
        factors.append(
            Factor(
                factor_id=factor_id,
                name=name,
                values=tuple(
                    FactorValue(value_id=f"{factor_id}v{j}", text=text)
                    for j, text in enumerate(values, start=1)
                ),
            )
        )
    return FactorSpace(scenario_id=scenario.id, factors=tuple(factors))


def abduce(
    provider: Provider, scenario: Scenario, config: AbductionConfig = AbductionConfig()
) -> AbductionDraft:
    """Propose a factor space for a scenario, keeping the intermediates.

    Two-stage by default: sample sentences favoring each outcome, then
    summarize them into factor blocks. config.direct skips the sentence
    stage and asks for the blocks outright. Unparseable summaries are
    resampled up to max_parse_retries times.
    """
    if not scenario.text.strip():
        raise ValidationError("scenario text must be non-empty")

    sentences1: tuple[str, ...] = ()
    sentences2: tuple[str, ...] = ()
    if config.direct:
        summary_prompt = render_prompt(
            "abduce_direct",
            scenario=scenario.text,
            outcome1=scenario.outcome1,
            outcome2=scenario.outcome2,
        )
    else:
        per_outcome = []
        for this, other in (
            (scenario.outcome1, scenario.outcome2),
            (scenario.outcome2, scenario.outcome1),
        ):
            prompt = render_prompt(
                "abduce_sentences",
                scenario=scenario.text,
                outcome_this=this,
                outcome_other=other,
                count=str(config.sentences_per_outcome),
            )
            response = provider.complete(
                CompletionRequest(prompt=prompt, temperature=config.temperature)
            )
            lines = _sentence_lines(response.text)
            if not lines:
                raise ParseError(f"no sentences generated for outcome {this!r}")
            per_outcome.append(tuple(lines[: config.sentences_per_outcome]))
        sentences1, sentences2 = per_outcome
        summary_prompt = render_prompt(
            "abduce_summarize",
            scenario=scenario.text,
            outcome1=scenario.outcome1,
            outcome2=scenario.outcome2,
            sentences1="\n".join(sentences1),
            sentences2="\n".join(sentences2),
        )

    last: ParseError | None = None
    for _ in range(config.max_parse_retries + 1):
        response = provider.complete(
            CompletionRequest(prompt=summary_prompt, temperature=config.temperature)
        )
        try:
            blocks = parse_factor_blocks(response.text)
        except ParseError as exc:
            last = exc
            continue
        return AbductionDraft(
            sentences1=sentences1,
            sentences2=sentences2,
            summary_text=response.text,
            space=_space_from_blocks(scenario, blocks),
        )
    raise last  # type: ignore[misc]


def generate_factors(
    provider: Provider, scenario: Scenario, config: AbductionConfig = AbductionConfig()
) -> FactorSpace:
    """The factor space alone; see abduce for the full draft."""
    return abduce(provider, scenario, config).space


_CLASS_LABELS = {
    "outcome 1": Support.OUTCOME1,
    "outcome 2": Support.OUTCOME2,
    "neutral": Support.NEUTRAL,
}


def parse_classification(text: str) -> Support:
    normalized = _normalize(text)
    found = {
        label
        for phrase, label in _CLASS_LABELS.items()
        if re.search(rf"\b{re.escape(phrase)}\b", normalized)
    }
    if len(found) != 1:
        raise ParseError(
            f"expected exactly one of outcome 1 / outcome 2 / neutral in {text!r}"
        )
    return found.pop()


def majority_support(votes: Sequence[Support]) -> Support:
    """The strictly most frequent label; any tie falls back to neutral."""
    counts = {label: votes.count(label) for label in set(votes)}
    top = max(counts.values())
    winners = [label for label, count in counts.items() if count == top]
    return winners[0] if len(winners) == 1 else Support.NEUTRAL


def classify_and_prune(
    provider: Provider,
    scenario: Scenario,
    space: FactorSpace,
    votes: int = 3,
    temperature: float = DEFAULT_TEMPERATURE,
) -> tuple[FactorSpace, tuple[ClassificationVerdict, ...]]:
    """Label every value with the outcome it supports; drop settled factors.

    Each value gets a majority over `votes` classification samples. A
    factor whose values all end up with one label (all neutral, or all
    backing the same outcome) cannot influence the decision and is removed.
    """
    if votes < 1:
        raise ValidationError("votes must be at least 1")
    verdicts: list[ClassificationVerdict] = []
    decided: dict[tuple[str, str], Support] = {}
    for factor, value in space.value_pairs():
        prompt = render_prompt(
            "classify_value",
            scenario=scenario.text,
            outcome1=scenario.outcome1,
            outcome2=scenario.outcome2,
            value=value.text,
        )
        response = provider.complete(
            CompletionRequest(prompt=prompt, temperature=temperature, n=votes)
        )
        ballot = tuple(parse_classification(text) for text in response.texts)
        label = majority_support(ballot)
        verdicts.append(
            ClassificationVerdict(
                factor_id=factor.factor_id,
                value_id=value.value_id,
                votes=ballot,
                decided=label,
            )
        )
        decided[(factor.factor_id, value.value_id)] = label

    kept: list[Factor] = []
    for factor in space.factors:
        labels = {decided[(factor.factor_id, v.value_id)] for v in factor.values}
        if len(labels) == 1:
            continue
        kept.append(
            Factor(
                factor_id=factor.factor_id,
                name=factor.name,
                values=tuple(
                    FactorValue(
                        value_id=v.value_id,
                        text=v.text,
                        support=decided[(factor.factor_id, v.value_id)],
                    )
                    for v in factor.values
                ),
            )
        )
    if not kept:
        raise ValidationError("every factor was pruned; nothing left to decide with")
    return (
        FactorSpace(scenario_id=space.scenario_id, factors=tuple(kept)),
        tuple(verdicts),
    )


def _numbered(items: Sequence[str]) -> str:
    return "\n".join(f"{i}. {item}" for i, item in enumerate(items, start=1))


_NONE_ANSWER = re.compile(r"\bnone\b", re.IGNORECASE)


def _parse_index_list(text: str, upper: int) -> list[int]:
    """Comma/word separated 1-based indices, or 'none' for an empty list."""
    numbers = [int(m) for m in re.findall(r"\d+", text)]
    if not numbers:
        if _NONE_ANSWER.search(text):
            return []
        raise ParseError(f"expected factor numbers or none, got {text!r}")
    out = []
    for n in numbers:
        if not 1 <= n <= upper:
            raise ParseError(f"index {n} out of range 1..{upper} in {text!r}")
        if n not in out:
            out.append(n)
    return out


def _parse_single_index(text: str, upper: int) -> int | None:
    numbers = [int(m) for m in re.findall(r"\d+", text)]
    if not numbers:
        if _NONE_ANSWER.search(text):
            return None
        raise ParseError(f"expected a value number or none, got {text!r}")
    if len(set(numbers)) != 1:
        raise ParseError(f"expected a single value number, got {text!r}")
    n = numbers[0]
    if not 1 <= n <= upper:
        raise ParseError(f"index {n} out of range 1..{upper} in {text!r}")
    return n


def parse_yes_no(text: str) -> bool:
    normalized = _normalize(text)
    yes = re.search(r"\byes\b", normalized) is not None
    no = re.search(r"\bno\b", normalized) is not None
    if yes == no:
        raise ParseError(f"expected yes or no, got {text!r}")
    return yes


def _select_value(
    provider: Provider,
    scenario: Scenario,
    condition: str,
    factor: Factor,
    temperature: float,
) -> str | None:
    """One hierarchy value-selection pass: the value id the context implies
    most within this factor, or None."""
    prompt = render_prompt(
        "entail_value",
        scenario=scenario.text,
        condition=condition,
        factor=factor.name,
        values=_numbered([v.text for v in factor.values]),
    )
    response = provider.complete(
        CompletionRequest(prompt=prompt, temperature=temperature)
    )
    index = _parse_single_index(response.text, factor.cardinality)
    return None if index is None else factor.values[index - 1].value_id


def _hierarchy_pass(
    provider: Provider,
    scenario: Scenario,
    condition: str,
    space: FactorSpace,
    temperature: float,
) -> dict[str, str]:
    prompt = render_prompt(
        "entail_factors",
        scenario=scenario.text,
        condition=condition,
        factors=_numbered([f.name for f in space.factors]),
    )
    response = provider.complete(
        CompletionRequest(prompt=prompt, temperature=temperature)
    )
    implied = _parse_index_list(response.text, len(space.factors))
    observed: dict[str, str] = {}
    for position in implied:
        factor = space.factors[position - 1]
        value_id = _select_value(provider, scenario, condition, factor, temperature)
        if value_id is not None:
            observed[factor.factor_id] = value_id
    return observed


def _direct_pass(
    provider: Provider,
    scenario: Scenario,
    condition: str,
    space: FactorSpace,
    temperature: float,
) -> dict[str, str]:
    observed: dict[str, str] = {}
    for factor in space.factors:
        implied: list[str] = []
        for value in factor.values:
            prompt = render_prompt(
                "entail_direct",
                scenario=scenario.text,
                condition=condition,
                value=value.text,
            )
            response = provider.complete(
                CompletionRequest(prompt=prompt, temperature=temperature)
            )
            if parse_yes_no(response.text):
                implied.append(value.value_id)
        if len(implied) == 1:
            observed[factor.factor_id] = implied[0]
        elif len(implied) > 1:
            # More than one value claimed: the value-selection prompt prunes
            # the claim down to a single value.
            value_id = _select_value(provider, scenario, condition, factor, temperature)
            if value_id is not None:
                observed[factor.factor_id] = value_id
    return observed


def entail(
    provider: Provider,
    scenario: Scenario,
    condition: str,
    space: FactorSpace,
    config: EntailmentConfig = EntailmentConfig(),
    temperature: float = DEFAULT_TEMPERATURE,
) -> PartialObservation:
    """Map a condition onto observed factor values.

    Runs hierarchy_count hierarchy passes and the rest direct passes; a
    value is observed only when a strict majority of all passes implies
    it. An empty observation is a legal result.
    """
    if not condition.strip():
        raise ValidationError("condition text must be non-empty")
    passes: list[dict[str, str]] = []
    for _ in range(config.hierarchy_count):
        passes.append(_hierarchy_pass(provider, scenario, condition, space, temperature))
    for _ in range(config.total_samples - config.hierarchy_count):
        passes.append(_direct_pass(provider, scenario, condition, space, temperature))

    observed: dict[str, str] = {}
    threshold = config.total_samples / 2
    for factor in space.factors:
        counts: dict[str, int] = {}
        for single in passes:
            value_id = single.get(factor.factor_id)
            if value_id is not None:
                counts[value_id] = counts.get(value_id, 0) + 1
        if not counts:
            continue
        best = max(counts.values())
        winners = [v for v, c in counts.items() if c == best]
        if len(winners) == 1 and best > threshold:
            observed[factor.factor_id] = winners[0]
    result = PartialObservation(values=observed)
    result.validate(space)
    return result


def render_information(space: FactorSpace, assignment: CompleteAssignment) -> str:
    """The complete-information block fed to probability elicitation."""
    lines = []
    for factor, idx in zip(space.factors, assignment.indices):
        lines.append(f"- {factor.values[idx].text}")
    return "\n".join(lines)


def elicit_targets(
    provider: Provider,
    scenario: Scenario,
    space: FactorSpace,
    assignments: Sequence[CompleteAssignment],
    temperature: float = DEFAULT_TEMPERATURE,
    max_parse_retries: int = 2,
) -> list[TrainingSample]:
    """Verbalized-probability targets for sampled complete assignments."""
    samples: list[TrainingSample] = []
    for assignment in assignments:
        assignment.validate(space)
        prompt = render_prompt(
            "elicit_probability",
            scenario=scenario.text,
            outcome1=scenario.outcome1,
            outcome2=scenario.outcome2,
            information=render_information(space, assignment),
        )
        last: ParseError | None = None
        for _ in range(max_parse_retries + 1):
            response = provider.complete(
                CompletionRequest(prompt=prompt, temperature=temperature)
            )
            try:
                level = parse_verbal_level(response.text)
            except ParseError as exc:
                last = exc
                continue
            samples.append(
                TrainingSample(assignment=assignment, target=level.probability)
            )
            break
        else:
            raise last  # type: ignore[misc]
    return samples


def rephrase_question(
    provider: Provider | None,
    value_text: str,
    temperature: float = DEFAULT_TEMPERATURE,
) -> str:
    """Turn a value statement into a yes/no question.

    Uses the template fallback when no provider is configured.
    """
    if not value_text.strip():
        raise ValidationError("value text must be non-empty")
    if provider is None:
        return default_question_text(value_text)
    prompt = render_prompt("rephrase_question", statement=value_text)
    response = provider.complete(
        CompletionRequest(prompt=prompt, temperature=temperature)
    )
    for raw in response.text.splitlines():
        line = raw.strip().strip('"')
        if line:
            if not line.endswith("?"):
                raise ParseError(f"rephrased question must end with '?', got {line!r}")
            return line
    raise ParseError("empty rephrasing response")


_PERCENT = re.compile(r"(\d+(?:\.\d+)?)\s*%")


def parse_percentage(text: str, *, last: bool = False) -> float:
    """A percentage as a fraction; `last` takes the final match (for
    answers that end a reasoning chain), otherwise exactly one must occur."""
    matches = _PERCENT.findall(text)
    if not matches:
        raise ParseError(f"no percentage found in {text!r}")
    if not last and len(matches) > 1:
        raise ParseError(f"expected a single percentage, found {len(matches)}")
    value = float(matches[-1] if last else matches[0]) / 100.0
    if not 0.0 <= value <= 1.0:
        raise ParseError(f"percentage out of range: {value * 100}%")
    return value


_EC_LABELS = {
    "condition 1": PairwiseChoice.CONDITION1,
    "condition 2": PairwiseChoice.CONDITION2,
    "same": PairwiseChoice.SAME,
}


def parse_ec_choice(text: str) -> PairwiseChoice:
    normalized = _normalize(text)
    found = {
        label
        for phrase, label in _EC_LABELS.items()
        if re.search(rf"\b{re.escape(phrase)}\b", normalized)
    }
    if len(found) != 1:
        raise ParseError(
            f"expected exactly one of condition 1 / condition 2 / same in {text!r}"
        )
    return found.pop()


def _majority_value(values: Sequence[float]) -> float:
    """Most frequent value; with no unique mode, the median (middle of the
    sorted samples) stands in."""
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    top = max(counts.values())
    winners = sorted(v for v, c in counts.items() if c == top)
    if len(winners) == 1:
        return winners[0]
    ordered = sorted(values)
    return ordered[len(ordered) // 2]


def verbalize_baseline(
    provider: Provider,
    scenario: Scenario,
    conditions: Sequence[str],
    mode: BaselineMode,
    target_outcome: int = 1,
    samples: int = 3,
    temperature: float = DEFAULT_TEMPERATURE,
) -> BaselineResult:
    """Direct LLM verbalization baselines, majority-voted over samples.

    VANILLA and COT estimate P(outcome 1) for one condition; EC picks
    which of two conditions better supports the target outcome.
    """
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    if mode is BaselineMode.EC:
        if len(conditions) != 2:
            raise ValidationError("EC mode needs exactly two conditions")
        prompt = render_prompt(
            "baseline_ec",
            scenario=scenario.text,
            condition1=conditions[0],
            condition2=conditions[1],
            outcome=scenario.outcome_text(target_outcome),
        )
        response = provider.complete(
            CompletionRequest(prompt=prompt, temperature=temperature, n=samples)
        )
        choices = [parse_ec_choice(text) for text in response.texts]
        counts = {c: choices.count(c) for c in set(choices)}
        top = max(counts.values())
        winners = [c for c, n in counts.items() if n == top]
        choice = winners[0] if len(winners) == 1 else PairwiseChoice.SAME
        return BaselineResult(mode=mode, samples=response.texts, choice=choice)

    if len(conditions) != 1:
        raise ValidationError(f"{mode.value} mode needs exactly one condition")
    name = "baseline_vanilla" if mode is BaselineMode.VANILLA else "baseline_cot"
    prompt = render_prompt(
        name,
        scenario=scenario.text,
        condition=conditions[0],
        outcome1=scenario.outcome1,
        outcome2=scenario.outcome2,
    )
    response = provider.complete(
        CompletionRequest(prompt=prompt, temperature=temperature, n=samples)
    )
    values = [
        parse_percentage(text, last=mode is BaselineMode.COT)
        for text in response.texts
    ]
    return BaselineResult(
        mode=mode, samples=response.texts, p_outcome1=_majority_value(values)
    )
