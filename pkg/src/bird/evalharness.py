"""Dataset ingestion and scoring protocols.

Two record shapes: pairwise preference (two conditions, gold says which
better supports the target outcome, or that they tie) and hard-label
decisions (one condition, gold outcome). Pairwise runs score each
condition independently and compare; reports carry per-category
precision/recall/F1 plus a micro average computed from the global
true-positive, false-positive, and false-negative counts. Decision runs
report accuracy over decided records only, with unknowns counted
separately.

Entailment is injected as a callable so the harness itself never talks to
a provider.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .bundle import ScenarioBundle
from .engine import DEFAULT_TIE_TOLERANCE, PairwiseChoice, Verdict, infer
from .errors import ValidationError
from .factors import PartialObservation
from .pool import EstimatorKind

PAIRWISE_SCHEMA = "pairwise_eval.v1"
DECISION_SCHEMA = "decision_eval.v1"

# entail_fn(bundle, condition_text) -> the observation the condition implies
EntailFn = Callable[[ScenarioBundle, str], PartialObservation]

_CHOICE_NAMES = {
    "condition1": PairwiseChoice.CONDITION1,
    "condition2": PairwiseChoice.CONDITION2,
    "same": PairwiseChoice.SAME,
}


@dataclass(frozen=True)
class PairwiseRecord:
    scenario_id: str
    condition1: str
    condition2: str
    target_outcome: int
    gold: PairwiseChoice

    def __post_init__(self):
        if self.target_outcome not in (1, 2):
            raise ValidationError(
                f"target_outcome must be 1 or 2, got {self.target_outcome}"
            )
        if not self.condition1.strip() or not self.condition2.strip():
            raise ValidationError("pairwise records need two non-empty conditions")


@dataclass(frozen=True)
class DecisionRecord:
    scenario_id: str
    condition: str
    gold_outcome: int

    def __post_init__(self):
        if self.gold_outcome not in (1, 2):
            raise ValidationError(
                f"gold_outcome must be 1 or 2, got {self.gold_outcome}"
            )
        if not self.condition.strip():
            raise ValidationError("decision records need a non-empty condition")


@dataclass(frozen=True)
class CategoryScore:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class EvalReport:
    total: int
    categories: Mapping[str, CategoryScore]
    micro_f1: float | None = None
    accuracy: float | None = None
    unknown_rate: float | None = None
    decided: int = 0
    correct: int = 0
    unknown: int = 0

    def to_json(self) -> dict:
        doc: dict = {"total": self.total}
        if self.categories:
            doc["categories"] = {
                name: {
                    "tp": s.tp,
                    "fp": s.fp,
                    "fn": s.fn,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                }
                for name, s in self.categories.items()
            }
        if self.micro_f1 is not None:
            doc["micro_f1"] = self.micro_f1
        if self.accuracy is not None:
            doc["accuracy"] = self.accuracy
        if self.unknown_rate is not None:
            doc.update(
                unknown_rate=self.unknown_rate,
                decided=self.decided,
                correct=self.correct,
                unknown=self.unknown,
            )
        return doc

    def format_table(self) -> str:
        lines = []
        if self.categories:
            width = max(len(name) for name in self.categories)
            lines.append(
                f"{'category'.ljust(width)}  {'P':>7}  {'R':>7}  {'F1':>7}  tp/fp/fn"
            )
            for name, s in self.categories.items():
                lines.append(
                    f"{name.ljust(width)}  {s.precision:7.3f}  {s.recall:7.3f}  "
                    f"{s.f1:7.3f}  {s.tp}/{s.fp}/{s.fn}"
                )
        if self.micro_f1 is not None:
            lines.append(f"micro F1: {self.micro_f1:.3f} over {self.total} records")
        if self.accuracy is not None:
            lines.append(
                f"accuracy: {self.accuracy:.3f} on {self.decided} decided "
                f"({self.correct} correct)"
            )
        if self.unknown_rate is not None:
            lines.append(
                f"unknown rate: {self.unknown_rate:.3f} ({self.unknown}/{self.total})"
            )
        return "\n".join(lines)


def _record_error(path: str, lineno: int, message: str) -> ValidationError:
    return ValidationError(f"{path}:{lineno}: {message}")


def _load_lines(path: Path | str, schema: str):
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise _record_error(str(path), lineno, f"not valid JSON: {exc}")
            if doc.get("schema") != schema:
                raise _record_error(
                    str(path),
                    lineno,
                    f"expected schema {schema!r}, got {doc.get('schema')!r}",
                )
            yield lineno, doc


def ingest(path: Path | str, format: str) -> list[PairwiseRecord] | list[DecisionRecord]:
    """Read a JSON-lines evaluation file; malformed lines name their number."""
    if format == "pairwise":
        records1: list[PairwiseRecord] = []
        for lineno, doc in _load_lines(path, PAIRWISE_SCHEMA):
            try:
                gold = _CHOICE_NAMES[str(doc.get("gold", "")).lower()]
            except KeyError:
                raise _record_error(
                    str(path), lineno, f"gold must be one of {sorted(_CHOICE_NAMES)}"
                )
            try:
                records1.append(
                    PairwiseRecord(
                        scenario_id=str(doc["scenario_id"]),
                        condition1=str(doc["condition1"]),
                        condition2=str(doc["condition2"]),
                        target_outcome=int(doc.get("target_outcome", 1)),
                        gold=gold,
                    )
                )
            except (KeyError, ValidationError, TypeError, ValueError) as exc:
                raise _record_error(str(path), lineno, str(exc))
        return records1
    if format == "decisions":
        records2: list[DecisionRecord] = []
        for lineno, doc in _load_lines(path, DECISION_SCHEMA):
            try:
                records2.append(
                    DecisionRecord(
                        scenario_id=str(doc["scenario_id"]),
                        condition=str(doc["condition"]),
                        gold_outcome=int(doc["gold_outcome"]),
                    )
                )
            except (KeyError, ValidationError, TypeError, ValueError) as exc:
                raise _record_error(str(path), lineno, str(exc))
        return records2
    raise ValidationError(f"format must be pairwise or decisions, got {format!r}")


def _bundle_for(
    bundles: Mapping[str, ScenarioBundle], scenario_id: str
) -> ScenarioBundle:
    bundle = bundles.get(scenario_id)
    if bundle is None:
        raise ValidationError(f"no bundle for scenario {scenario_id!r}")
    if bundle.table is None:
        raise ValidationError(f"bundle for scenario {scenario_id!r} has no trained table")
    return bundle


def score_categories(
    pairs: Sequence[tuple[str, str]], labels: Sequence[str]
) -> tuple[dict[str, CategoryScore], float]:
    """(gold, predicted) pairs -> per-category scores and the micro F1.

    Micro precision/recall come from summing tp, fp, fn across categories.
    """
    tp = {label: 0 for label in labels}
    fp = {label: 0 for label in labels}
    fn = {label: 0 for label in labels}
    for gold, predicted in pairs:
        if gold == predicted:
            tp[gold] += 1
        else:
            fp[predicted] += 1
            fn[gold] += 1
    categories = {
        label: CategoryScore(tp=tp[label], fp=fp[label], fn=fn[label])
        for label in labels
    }
    total_tp = sum(tp.values())
    total_fp = sum(fp.values())
    total_fn = sum(fn.values())
    precision = total_tp / (total_tp + total_fp) if total_tp + total_fp else 0.0
    recall = total_tp / (total_tp + total_fn) if total_tp + total_fn else 0.0
    micro = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return categories, micro


def run_pairwise(
    records: Sequence[PairwiseRecord],
    bundles: Mapping[str, ScenarioBundle],
    kind: EstimatorKind,
    entail_fn: EntailFn,
    *,
    tolerance: float = DEFAULT_TIE_TOLERANCE,
) -> EvalReport:
    """Score each record's two conditions independently and compare."""
    pairs: list[tuple[str, str]] = []
    for record in records:
        bundle = _bundle_for(bundles, record.scenario_id)
        score = []
        for condition in (record.condition1, record.condition2):
            obs = entail_fn(bundle, condition)
            est = infer(bundle.space, bundle.table, obs, kind)
            score.append(
                est.p_outcome1 if record.target_outcome == 1 else est.p_outcome2
            )
        if abs(score[0] - score[1]) < tolerance:
            predicted = PairwiseChoice.SAME
        elif score[0] > score[1]:
            predicted = PairwiseChoice.CONDITION1
        else:
            predicted = PairwiseChoice.CONDITION2
        pairs.append((record.gold.value, predicted.value))
    categories, micro = score_categories(
        pairs, [c.value for c in PairwiseChoice.__members__.values()]
    )
    return EvalReport(total=len(records), categories=categories, micro_f1=micro)


def run_decisions(
    records: Sequence[DecisionRecord],
    bundles: Mapping[str, ScenarioBundle],
    kind: EstimatorKind,
    entail_fn: EntailFn,
) -> EvalReport:
    """Hard-label decisions; unknown verdicts leave the accuracy denominator."""
    decided = correct = unknown = 0
    for record in records:
        bundle = _bundle_for(bundles, record.scenario_id)
        obs = entail_fn(bundle, record.condition)
        est = infer(bundle.space, bundle.table, obs, kind)
        if est.verdict is Verdict.UNKNOWN:
            unknown += 1
            continue
        decided += 1
        predicted = {Verdict.OUTCOME1: 1, Verdict.OUTCOME2: 2}.get(est.verdict)
        if predicted == record.gold_outcome:
            correct += 1
    total = len(records)
    return EvalReport(
        total=total,
        categories={},
        accuracy=(correct / decided) if decided else 0.0,
        unknown_rate=(unknown / total) if total else 0.0,
        decided=decided,
        correct=correct,
        unknown=unknown,
    )


def run_decision_sweep(
    records: Sequence[DecisionRecord],
    bundles: Mapping[str, ScenarioBundle],
    kinds: Sequence[EstimatorKind],
    entail_fn: EntailFn,
) -> dict[EstimatorKind, EvalReport]:
    """One decision report per estimator over the same records."""
    return {kind: run_decisions(records, bundles, kind, entail_fn) for kind in kinds}
