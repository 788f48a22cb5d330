"""Decision sessions and their persistent event log.

A session accumulates a partial observation and preference overrides for
one scenario. Every mutation is one appended JSON-line event; session
state is a pure fold over its events, so a store reopened on the same
file (or a second store over it) rebuilds identical sessions. Estimates
are never persisted: they are recomputed from the observation and
overrides, which keeps any history replayable.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator, Mapping

from .bundle import ScenarioBundle
from .engine import FollowupQuestion, apply_answer
from .errors import UnknownSessionError, ValidationError
from .factors import PartialObservation

SESSION_LOG_SCHEMA = "session_log.v1"


@dataclass(frozen=True)
class DecisionSession:
    """Immutable snapshot of one session's folded state."""

    session_id: str
    scenario_id: str
    observation: PartialObservation
    overrides: Mapping[tuple[str, str], float]
    pending: FollowupQuestion | None
    events: tuple[dict, ...]

    @property
    def question_count(self) -> int:
        return sum(1 for e in self.events if e["event"] == "question")


def _fold(
    session: DecisionSession, event: dict, bundle: ScenarioBundle
) -> DecisionSession:
    """Apply one event to a session snapshot."""
    kind = event["event"]
    if kind == "created":
        session = replace(
            session,
            observation=PartialObservation(dict(event.get("observed", {}))),
        )
    elif kind == "condition":
        session = replace(
            session,
            observation=session.observation.merge(
                PartialObservation(dict(event.get("observed", {})))
            ),
        )
    elif kind == "question":
        session = replace(
            session,
            pending=FollowupQuestion(
                factor_id=event["factor_id"],
                value_id=event["value_id"],
                question_text=event["question_text"],
            ),
        )
    elif kind == "answer":
        if session.pending is None:
            raise ValidationError("no pending question to answer")
        session = replace(
            session,
            observation=apply_answer(
                session.observation,
                session.pending,
                bool(event["answer"]),
                bundle.space,
            ),
            pending=None,
        )
    elif kind == "override":
        merged = dict(session.overrides)
        merged[(event["factor_id"], event["value_id"])] = float(event["p"])
        session = replace(session, overrides=merged)
    else:
        raise ValidationError(f"unknown session event {kind!r}")
    return replace(session, events=session.events + (event,))


class SessionStore:
    """Append-only, single-file session log with in-memory snapshots.

    Pass path=None for an ephemeral store. All mutations share one lock;
    reads hand out immutable snapshots.
    """

    def __init__(
        self,
        bundles: Mapping[str, ScenarioBundle],
        path: Path | str | None = None,
    ):
        self._bundles = dict(bundles)
        self._path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._sessions: dict[str, DecisionSession] = {}
        if self._path is not None and self._path.exists():
            self._replay_file()

    def _replay_file(self) -> None:
        with self._path.open("r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(
                        f"{self._path}:{lineno}: not valid JSON: {exc}"
                    ) from exc
                if event.get("schema") != SESSION_LOG_SCHEMA:
                    raise ValidationError(
                        f"{self._path}:{lineno}: expected schema "
                        f"{SESSION_LOG_SCHEMA!r}, got {event.get('schema')!r}"
                    )
                self._apply(event, persist=False)

    def _bundle_of(self, scenario_id: str) -> ScenarioBundle:
        bundle = self._bundles.get(scenario_id)
        if bundle is None:
            raise ValidationError(f"no bundle for scenario {scenario_id!r}")
        return bundle

    def _apply(self, event: dict, persist: bool = True) -> DecisionSession:
        session_id = event["session_id"]
        if event["event"] == "created":
            if session_id in self._sessions:
                raise ValidationError(f"session {session_id!r} already exists")
            base = DecisionSession(
                session_id=session_id,
                scenario_id=event["scenario_id"],
                observation=PartialObservation.empty(),
                overrides={},
                pending=None,
                events=(),
            )
            self._bundle_of(event["scenario_id"])
        else:
            base = self._get(session_id)
        folded = _fold(base, event, self._bundle_of(base.scenario_id))
        if persist and self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            with self._path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(event, ensure_ascii=False) + "\n")
        self._sessions[session_id] = folded
        return folded

    def _get(self, session_id: str) -> DecisionSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"no session {session_id!r}")
        return session

    # Public surface: every mutation validates against current state under
    # the lock, then appends exactly one event.

    def get(self, session_id: str) -> DecisionSession:
        with self._lock:
            return self._get(session_id)

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._sessions)

    def create(
        self,
        scenario_id: str,
        observed: PartialObservation,
        condition_text: str | None = None,
    ) -> DecisionSession:
        with self._lock:
            event = {
                "schema": SESSION_LOG_SCHEMA,
                "event": "created",
                "session_id": uuid.uuid4().hex,
                "scenario_id": scenario_id,
                "condition": condition_text,
                "observed": observed.to_json(),
            }
            return self._apply(event)

    def add_condition(
        self, session_id: str, text: str, observed: PartialObservation
    ) -> DecisionSession:
        with self._lock:
            self._get(session_id)
            return self._apply(
                {
                    "schema": SESSION_LOG_SCHEMA,
                    "event": "condition",
                    "session_id": session_id,
                    "condition": text,
                    "observed": observed.to_json(),
                }
            )

    def record_question(
        self, session_id: str, question: FollowupQuestion, seed: int
    ) -> DecisionSession:
        with self._lock:
            self._get(session_id)
            return self._apply(
                {
                    "schema": SESSION_LOG_SCHEMA,
                    "event": "question",
                    "session_id": session_id,
                    "factor_id": question.factor_id,
                    "value_id": question.value_id,
                    "question_text": question.question_text,
                    "seed": seed,
                }
            )

    def record_answer(self, session_id: str, answer: bool) -> DecisionSession:
        with self._lock:
            self._get(session_id)
            return self._apply(
                {
                    "schema": SESSION_LOG_SCHEMA,
                    "event": "answer",
                    "session_id": session_id,
                    "answer": bool(answer),
                }
            )

    def record_override(
        self, session_id: str, factor_id: str, value_id: str, p: float
    ) -> DecisionSession:
        with self._lock:
            self._get(session_id)
            return self._apply(
                {
                    "schema": SESSION_LOG_SCHEMA,
                    "event": "override",
                    "session_id": session_id,
                    "factor_id": factor_id,
                    "value_id": value_id,
                    "p": float(p),
                }
            )

    def replay_states(self, session_id: str) -> Iterator[DecisionSession]:
        """Session snapshots after each event, rebuilt from scratch."""
        with self._lock:
            final = self._get(session_id)
            bundle = self._bundle_of(final.scenario_id)
            events = final.events
        session: DecisionSession | None = None
        for event in events:
            if session is None:
                session = DecisionSession(
                    session_id=session_id,
                    scenario_id=event["scenario_id"],
                    observation=PartialObservation.empty(),
                    overrides={},
                    pending=None,
                    events=(),
                )
            session = _fold(session, event, bundle)
            yield session
