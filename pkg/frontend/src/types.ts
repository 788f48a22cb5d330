/** Wire types of the decision service, mirrored field for field. */

/** One consistent completion's share of the estimate. */
export interface ContributionView {
  values: Record<string, string>;
  weight: number;
  p_outcome1: number;
}

/** The servable outcome estimate for the current observation. */
export interface EstimateView {
  p_outcome1: number;
  p_outcome2: number;
  verdict: string;
  kind: string;
  contributions: ContributionView[];
}

/** A pending yes-or-no follow-up about one factor value. */
export interface QuestionView {
  factor_id: string;
  value_id: string;
  question_text: string;
}

/** One factor value with its probability entry and status flags. */
export interface ValueView {
  value_id: string;
  text: string;
  support: string;
  p: number;
  observed: boolean;
  overridden: boolean;
}

/** One factor with its values and which value, if any, is observed. */
export interface FactorView {
  factor_id: string;
  name: string;
  observed_value_id: string | null;
  values: ValueView[];
}

/** A user-supplied replacement for one probability entry. */
export interface OverrideView {
  factor_id: string;
  value_id: string;
  p: number;
}

/** One timeline entry: what happened and the estimate right after. */
export interface HistoryItem {
  event: string;
  detail: Record<string, unknown>;
  estimate_after: EstimateView;
}

/** Full server snapshot of one decision session. */
export interface SessionView {
  session_id: string;
  scenario_id: string;
  scenario_text: string;
  outcome1: string;
  outcome2: string;
  observation: Record<string, string>;
  estimate: EstimateView;
  factors: FactorView[];
  pending_question: QuestionView | null;
  overrides: OverrideView[];
  history: HistoryItem[];
  loss_trace: number[];
}

/** One selectable scenario from the service catalog. */
export interface ScenarioSummary {
  scenario_id: string;
  text: string;
  outcome1: string;
  outcome2: string;
  factor_count: number;
  trained: boolean;
}

/** Liveness probe payload. */
export interface HealthView {
  status: string;
  scenarios: number;
}
