"""HTTP service exposing decision sessions over scenario bundles.

Endpoints:
  GET  /health
  GET  /scenarios
  POST /sessions                      {scenario_id, condition_text?}
  GET  /sessions/{id}
  POST /sessions/{id}/question
  POST /sessions/{id}/answer          {answer: yes|no}
  POST /sessions/{id}/override        {factor_id, value_id, p}
  POST /sessions/{id}/condition       {text}

All probability math happens in the engine; this layer folds session
events, recomputes estimates, and maps domain errors onto status codes
(404 unknown ids, 409 conflicting state, 422 invalid input, 503 provider
trouble).
"""

from __future__ import annotations

from typing import Mapping

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from ..bundle import ScenarioBundle, wire_round
from ..engine import (
    OutcomeEstimate,
    PreferenceOverride,
    infer,
    select_followup,
)
from ..errors import (
    AlreadyObservedError,
    BirdError,
    DomainError,
    NothingToAskError,
    ParseError,
    ProviderError,
    UnknownScenarioError,
    UnknownSessionError,
    ValidationError,
)
from ..factors import PartialObservation
from ..llm import Provider
from ..pipeline import EntailmentConfig, entail, rephrase_question
from ..pool import EstimatorKind
from ..sessions import DecisionSession, SessionStore
from .schemas import (
    AnswerRequest,
    ConditionRequest,
    ContributionView,
    CreateSessionRequest,
    EstimateView,
    FactorView,
    HistoryItem,
    OverrideRequest,
    OverrideView,
    QuestionView,
    ScenarioSummary,
    SessionView,
    ValueView,
)

_STATUS = (
    (UnknownSessionError, 404),
    (UnknownScenarioError, 404),
    (AlreadyObservedError, 409),
    (NothingToAskError, 409),
    (ProviderError, 503),
    (DomainError, 422),
    (ParseError, 502),
    (ValidationError, 422),
    (BirdError, 500),
)


def _estimate_view(
    estimate: OutcomeEstimate, bundle: ScenarioBundle, contributions: bool = True
) -> EstimateView:
    # Probabilities leave the service rounded exactly like the file formats.
    view = EstimateView(
        p_outcome1=wire_round(estimate.p_outcome1),
        p_outcome2=wire_round(estimate.p_outcome2),
        verdict=estimate.verdict.value,
        kind=estimate.kind.value,
    )
    if contributions:
        view.contributions = [
            ContributionView(
                values=c.assignment.value_map(bundle.space),
                weight=wire_round(c.weight),
                p_outcome1=wire_round(c.p_outcome1),
            )
            for c in estimate.contributions
        ]
    return view


class DecisionService:
    """The service's state and operations, independent of HTTP."""

    def __init__(
        self,
        bundles: Mapping[str, ScenarioBundle],
        store: SessionStore | None = None,
        provider: Provider | None = None,
        entailment: EntailmentConfig = EntailmentConfig(),
        question_seed: int = 0,
    ):
        self.bundles = dict(bundles)
        self.store = store if store is not None else SessionStore(self.bundles)
        self.provider = provider
        self.entailment = entailment
        self.question_seed = question_seed

    def bundle(self, scenario_id: str) -> ScenarioBundle:
        bundle = self.bundles.get(scenario_id)
        if bundle is None:
            raise UnknownScenarioError(f"no scenario {scenario_id!r}")
        return bundle

    def _entail(self, bundle: ScenarioBundle, text: str) -> PartialObservation:
        if self.provider is None:
            raise ProviderError(
                "mapping a condition onto factors needs an LLM provider"
            )
        return entail(
            self.provider, bundle.scenario, text, bundle.space, self.entailment
        )

    def _infer(self, session: DecisionSession) -> OutcomeEstimate:
        bundle = self.bundle(session.scenario_id)
        overrides = PreferenceOverride(values=dict(session.overrides))
        return infer(
            bundle.space,
            bundle.require_table(),
            session.observation,
            EstimatorKind.TRAINED,
            overrides,
        )

    def create_session(self, scenario_id: str, condition_text: str | None) -> DecisionSession:
        bundle = self.bundle(scenario_id)
        bundle.require_table()
        observed = (
            self._entail(bundle, condition_text)
            if condition_text and condition_text.strip()
            else PartialObservation.empty()
        )
        return self.store.create(scenario_id, observed, condition_text)

    def add_condition(self, session_id: str, text: str) -> DecisionSession:
        session = self.store.get(session_id)
        observed = self._entail(self.bundle(session.scenario_id), text)
        return self.store.add_condition(session_id, text, observed)

    def ask_question(self, session_id: str) -> DecisionSession:
        session = self.store.get(session_id)
        bundle = self.bundle(session.scenario_id)
        table = PreferenceOverride(values=dict(session.overrides)).apply(
            bundle.require_table()
        )
        seed = self.question_seed + session.question_count
        rephrase = None
        if self.provider is not None:
            provider = self.provider
            rephrase = lambda text: rephrase_question(provider, text)
        question = select_followup(
            bundle.space,
            table,
            session.observation,
            seed,
            rephrase=rephrase,
        )
        return self.store.record_question(session_id, question, seed)

    def answer(self, session_id: str, yes: bool) -> DecisionSession:
        session = self.store.get(session_id)
        if session.pending is None:
            raise NothingToAskError("no pending question; request one first")
        return self.store.record_answer(session_id, yes)

    def override(
        self, session_id: str, factor_id: str, value_id: str, p: float
    ) -> DecisionSession:
        session = self.store.get(session_id)
        bundle = self.bundle(session.scenario_id)
        table = bundle.require_table()
        bundle.space.factor_by_id(factor_id).value_index(value_id)
        if not table.delta <= p <= 1.0 - table.delta:
            raise DomainError(
                f"override probability must lie in [{table.delta}, {1.0 - table.delta}]"
            )
        return self.store.record_override(session_id, factor_id, value_id, p)

    def session_view(self, session_id: str) -> SessionView:
        session = self.store.get(session_id)
        bundle = self.bundle(session.scenario_id)
        estimate = self._infer(session)
        table = PreferenceOverride(values=dict(session.overrides)).apply(
            bundle.require_table()
        )

        factors = []
        for factor in bundle.space.factors:
            observed_value = session.observation.values.get(factor.factor_id)
            factors.append(
                FactorView(
                    factor_id=factor.factor_id,
                    name=factor.name,
                    observed_value_id=observed_value,
                    values=[
                        ValueView(
                            value_id=value.value_id,
                            text=value.text,
                            support=value.support.value,
                            p=wire_round(table.p(factor.factor_id, value.value_id)),
                            observed=observed_value == value.value_id,
                            overridden=(factor.factor_id, value.value_id)
                            in session.overrides,
                        )
                        for value in factor.values
                    ],
                )
            )

        history = []
        for state, event in zip(
            self.store.replay_states(session_id), session.events
        ):
            after = self._infer(state)
            detail = {
                k: v
                for k, v in event.items()
                if k not in ("schema", "event", "session_id")
            }
            history.append(
                HistoryItem(
                    event=event["event"],
                    detail=detail,
                    estimate_after=_estimate_view(after, bundle, contributions=False),
                )
            )

        return SessionView(
            session_id=session.session_id,
            scenario_id=session.scenario_id,
            scenario_text=bundle.scenario.text,
            outcome1=bundle.scenario.outcome1,
            outcome2=bundle.scenario.outcome2,
            observation=dict(session.observation.values),
            estimate=_estimate_view(estimate, bundle),
            factors=factors,
            pending_question=(
                QuestionView(
                    factor_id=session.pending.factor_id,
                    value_id=session.pending.value_id,
                    question_text=session.pending.question_text,
                )
                if session.pending is not None
                else None
            ),
            overrides=[
                OverrideView(factor_id=fid, value_id=vid, p=wire_round(p))
                for (fid, vid), p in session.overrides.items()
            ],
            history=history,
            loss_trace=[wire_round(loss) for loss in bundle.loss_trace],
        )

    def scenario_summaries(self) -> list[ScenarioSummary]:
        return [
            ScenarioSummary(
                scenario_id=bundle.scenario.id,
                text=bundle.scenario.text,
                outcome1=bundle.scenario.outcome1,
                outcome2=bundle.scenario.outcome2,
                factor_count=len(bundle.space.factors),
                trained=bundle.table is not None,
            )
            for bundle in self.bundles.values()
        ]


def create_app(
    bundles: Mapping[str, ScenarioBundle],
    store: SessionStore | None = None,
    provider: Provider | None = None,
    entailment: EntailmentConfig = EntailmentConfig(),
    question_seed: int = 0,
) -> FastAPI:
    service = DecisionService(
        bundles,
        store=store,
        provider=provider,
        entailment=entailment,
        question_seed=question_seed,
    )
    app = FastAPI(title="bird decision service")
    app.state.service = service

    for error_type, status in _STATUS:
        def _handler(request, exc, status=status):
            return JSONResponse(status_code=status, content={"detail": str(exc)})

        app.add_exception_handler(error_type, _handler)

    @app.get("/health")
    def health():
        return {"status": "ok", "scenarios": len(service.bundles)}

    @app.get("/scenarios", response_model=list[ScenarioSummary])
    def scenarios():
        return service.scenario_summaries()

    @app.post("/sessions", response_model=SessionView, status_code=201)
    def create_session(request: CreateSessionRequest):
        session = service.create_session(request.scenario_id, request.condition_text)
        return service.session_view(session.session_id)

    @app.get("/sessions/{session_id}", response_model=SessionView)
    def get_session(session_id: str):
        return service.session_view(session_id)

    @app.post("/sessions/{session_id}/question", response_model=SessionView)
    def post_question(session_id: str):
        session = service.ask_question(session_id)
        return service.session_view(session.session_id)

    @app.post("/sessions/{session_id}/answer", response_model=SessionView)
    def post_answer(session_id: str, request: AnswerRequest):
        session = service.answer(session_id, request.as_bool)
        return service.session_view(session.session_id)

    @app.post("/sessions/{session_id}/override", response_model=SessionView)
    def post_override(session_id: str, request: OverrideRequest):
        session = service.override(
            session_id, request.factor_id, request.value_id, request.p
        )
        return service.session_view(session.session_id)

    @app.post("/sessions/{session_id}/condition", response_model=SessionView)
    def post_condition(session_id: str, request: ConditionRequest):
        session = service.add_condition(session_id, request.text)
        return service.session_view(session.session_id)

    return app
