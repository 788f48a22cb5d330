"""Request and response models of the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator


class CreateSessionRequest(BaseModel):
    scenario_id: str
    condition_text: str | None = None


class ConditionRequest(BaseModel):
    text: str = Field(min_length=1)


class AnswerRequest(BaseModel):
    answer: str

    @field_validator("answer")
    @classmethod
    def _yes_or_no(cls, value: str) -> str:
        normalized = value.strip().lower()
        if normalized not in ("yes", "no"):
            raise ValueError("answer must be yes or no")
        return normalized

    @property
    def as_bool(self) -> bool:
        return self.answer == "yes"


class OverrideRequest(BaseModel):
    factor_id: str
    value_id: str
    p: float


class ContributionView(BaseModel):
    values: dict[str, str]
    weight: float
    p_outcome1: float


class EstimateView(BaseModel):
    p_outcome1: float
    p_outcome2: float
    verdict: str
    kind: str
    contributions: list[ContributionView] = []


class QuestionView(BaseModel):
    factor_id: str
    value_id: str
    question_text: str


class ValueView(BaseModel):
    value_id: str
    text: str
    support: str
    p: float
    observed: bool
    overridden: bool


class FactorView(BaseModel):
    factor_id: str
    name: str
    observed_value_id: str | None
    values: list[ValueView]


class OverrideView(BaseModel):
    factor_id: str
    value_id: str
    p: float


class HistoryItem(BaseModel):
    event: str
    detail: dict
    estimate_after: EstimateView


class SessionView(BaseModel):
    session_id: str
    scenario_id: str
    scenario_text: str
    outcome1: str
    outcome2: str
    observation: dict[str, str]
    estimate: EstimateView
    factors: list[FactorView]
    pending_question: QuestionView | None
    overrides: list[OverrideView]
    history: list[HistoryItem]
    loss_trace: list[float]


class ScenarioSummary(BaseModel):
    scenario_id: str
    text: str
    outcome1: str
    outcome2: str
    factor_count: int
    trained: bool
