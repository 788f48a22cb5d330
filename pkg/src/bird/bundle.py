"""Scenario bundles and the JSON wire formats around them.

A bundle collects everything one scenario needs at decision time: the
scenario, its classified factor space, the classification verdicts, the
trained table with its loss trace and config, and enough provenance to
replay the run against recorded fixtures.

Formats: "scenario.v1" (bare scenario), "trained_table.v1" (table +
trace + config), "scenario_bundle.v1" (everything), "outcome_estimate.v1"
(an inference result). Serialization is canonical: stable key order,
fixed separators, probabilities rounded to 12 decimals so files compare
byte-for-byte across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .engine import OutcomeEstimate
from .errors import ValidationError
from .factors import (
    FactorSpace,
    Scenario,
    Support,
    canonical_json,
    factor_space_to_json,
    parse_factor_space,
)
from .pipeline import PROMPT_VERSION, ClassificationVerdict
from .pool import DEFAULT_DELTA, ProbabilityTable
from .trainer import TrainingConfig

SCENARIO_SCHEMA = "scenario.v1"
FACTOR_SPACE_SCHEMA = "factor_space.v1"
TRAINED_TABLE_SCHEMA = "trained_table.v1"
BUNDLE_SCHEMA = "scenario_bundle.v1"
ESTIMATE_SCHEMA = "outcome_estimate.v1"

WIRE_DECIMALS = 12


def wire_round(p: float) -> float:
    return round(float(p), WIRE_DECIMALS)


def scenario_to_json(scenario: Scenario) -> dict:
    return {
        "schema": SCENARIO_SCHEMA,
        "id": scenario.id,
        "text": scenario.text,
        "outcome1": scenario.outcome1,
        "outcome2": scenario.outcome2,
    }


def parse_scenario(doc: dict | str) -> Scenario:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
    if doc.get("schema") not in (None, SCENARIO_SCHEMA):
        raise ValidationError(f"expected schema {SCENARIO_SCHEMA!r}, got {doc.get('schema')!r}")
    try:
        return Scenario(
            id=doc["id"],
            text=doc["text"],
            outcome1=doc["outcome1"],
            outcome2=doc["outcome2"],
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed scenario document: {exc}") from exc


def table_to_json(
    scenario_id: str,
    space: FactorSpace,
    table: ProbabilityTable,
    loss_trace: tuple[float, ...] = (),
    config: TrainingConfig | None = None,
) -> dict:
    entries = []
    for factor, value in space.value_pairs():
        key = (factor.factor_id, value.value_id)
        entries.append(
            {
                "factor_id": factor.factor_id,
                "value_id": value.value_id,
                "p": wire_round(table.probs[key]),
                "support": table.supports[key].value,
            }
        )
    doc: dict = {
        "schema": TRAINED_TABLE_SCHEMA,
        "scenario_id": scenario_id,
        "delta": table.delta,
        "entries": entries,
        "loss_trace": [wire_round(loss) for loss in loss_trace],
    }
    if config is not None:
        doc["config"] = config.to_json()
    return doc


def parse_table(doc: dict | str) -> tuple[str, ProbabilityTable, tuple[float, ...], TrainingConfig | None]:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
    if doc.get("schema") != TRAINED_TABLE_SCHEMA:
        raise ValidationError(
            f"expected schema {TRAINED_TABLE_SCHEMA!r}, got {doc.get('schema')!r}"
        )
    try:
        probs = {
            (e["factor_id"], e["value_id"]): float(e["p"]) for e in doc["entries"]
        }
        supports = {
            (e["factor_id"], e["value_id"]): Support(e["support"])
            for e in doc["entries"]
        }
        table = ProbabilityTable(
            probs=probs, supports=supports, delta=float(doc.get("delta", DEFAULT_DELTA))
        )
        trace = tuple(float(x) for x in doc.get("loss_trace", []))
        config = (
            TrainingConfig.from_json(doc["config"]) if "config" in doc else None
        )
        return str(doc["scenario_id"]), table, trace, config
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed trained_table.v1 document: {exc}") from exc


@dataclass(frozen=True)
class Provenance:
    """What produced a bundle: prompt set, provider, and the seeds used."""

    prompt_version: str = PROMPT_VERSION
    provider_id: str = "unknown"
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "prompt_version": self.prompt_version,
            "provider_id": self.provider_id,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "Provenance":
        return cls(
            prompt_version=str(doc.get("prompt_version", PROMPT_VERSION)),
            provider_id=str(doc.get("provider_id", "unknown")),
            seed=int(doc.get("seed", 0)),
        )


@dataclass(frozen=True)
class ScenarioBundle:
    """One scenario's decision-ready artifacts."""

    scenario: Scenario
    space: FactorSpace
    verdicts: tuple[ClassificationVerdict, ...] = ()
    table: ProbabilityTable | None = None
    loss_trace: tuple[float, ...] = ()
    train_config: TrainingConfig | None = None
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self):
        if self.space.scenario_id != self.scenario.id:
            raise ValidationError("bundle space does not belong to its scenario")
        if self.table is not None:
            self.table.validate_covers(self.space)

    def require_table(self) -> ProbabilityTable:
        if self.table is None:
            raise ValidationError(
                f"scenario {self.scenario.id!r} has no trained table yet"
            )
        return self.table


def bundle_to_json(bundle: ScenarioBundle) -> dict:
    doc: dict = {
        "schema": BUNDLE_SCHEMA,
        "scenario": scenario_to_json(bundle.scenario),
        "space": factor_space_to_json(bundle.scenario, bundle.space),
        "verdicts": [
            {
                "factor_id": v.factor_id,
                "value_id": v.value_id,
                "votes": [s.value for s in v.votes],
                "decided": v.decided.value,
            }
            for v in bundle.verdicts
        ],
        "provenance": bundle.provenance.to_json(),
    }
    if bundle.table is not None:
        doc["table"] = table_to_json(
            bundle.scenario.id,
            bundle.space,
            bundle.table,
            bundle.loss_trace,
            bundle.train_config,
        )
    return doc


def parse_bundle(doc: dict | str) -> ScenarioBundle:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
    if doc.get("schema") != BUNDLE_SCHEMA:
        raise ValidationError(
            f"expected schema {BUNDLE_SCHEMA!r}, got {doc.get('schema')!r}"
        )
    try:
        scenario = parse_scenario(doc["scenario"])
        _, space = parse_factor_space(doc["space"])
        verdicts = tuple(
            ClassificationVerdict(
                factor_id=v["factor_id"],
                value_id=v["value_id"],
                votes=tuple(Support(s) for s in v["votes"]),
                decided=Support(v["decided"]),
            )
            for v in doc.get("verdicts", [])
        )
        table = None
        trace: tuple[float, ...] = ()
        config = None
        if "table" in doc:
            _, table, trace, config = parse_table(doc["table"])
        provenance = Provenance.from_json(doc.get("provenance", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed scenario_bundle.v1 document: {exc}") from exc
    return ScenarioBundle(
        scenario=scenario,
        space=space,
        verdicts=verdicts,
        table=table,
        loss_trace=trace,
        train_config=config,
        provenance=provenance,
    )


def save_bundle(bundle: ScenarioBundle, path: Path | str) -> None:
    Path(path).write_text(canonical_json(bundle_to_json(bundle)), encoding="utf-8")


def load_bundle(path: Path | str) -> ScenarioBundle:
    return parse_bundle(Path(path).read_text(encoding="utf-8"))


def load_bundles(paths) -> dict[str, ScenarioBundle]:
    """Bundles keyed by scenario id; duplicate ids are an error."""
    bundles: dict[str, ScenarioBundle] = {}
    for path in paths:
        bundle = load_bundle(path)
        if bundle.scenario.id in bundles:
            raise ValidationError(f"duplicate bundle for scenario {bundle.scenario.id!r}")
        bundles[bundle.scenario.id] = bundle
    return bundles


def estimate_to_json(estimate: OutcomeEstimate, space: FactorSpace) -> dict:
    """outcome_estimate.v1: the marginal plus its per-assignment breakdown."""
    return {
        "schema": ESTIMATE_SCHEMA,
        "kind": estimate.kind.value,
        "verdict": estimate.verdict.value,
        "p_outcome1": wire_round(estimate.p_outcome1),
        "p_outcome2": wire_round(estimate.p_outcome2),
        "contributions": [
            {
                "values": c.assignment.value_map(space),
                "weight": wire_round(c.weight),
                "p_outcome1": wire_round(c.p_outcome1),
            }
            for c in estimate.contributions
        ],
    }
