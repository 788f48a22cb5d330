import type { RequestLogEntry } from "./api.ts";
import type { AppState } from "./state.ts";
import type { EstimateView, FactorView, HistoryItem, SessionView, ValueView } from "./types.ts";
import { barLabels, barWidths, exactProbability } from "./format.ts";

/** Everything the UI can ask the app shell to do; one service call each. */
export interface Actions {
  start(scenarioId: string, conditionText: string): void;
  addCondition(text: string): void;
  ask(): void;
  answer(answer: "yes" | "no"): void;
  override(factorId: string, valueId: string, p: number): void;
}

type Child = Node | string;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  node.append(...children);
  return node;
}

function verdictText(session: SessionView): string {
  switch (session.estimate.verdict) {
    case "outcome1":
      return session.outcome1;
    case "outcome2":
      return session.outcome2;
    case "tie":
      return "tie";
    default:
      return "unknown";
  }
}

/** Redraws the whole client from confirmed server state. */
export function render(
  root: HTMLElement,
  state: AppState,
  actions: Actions,
  log: RequestLogEntry[],
): void {
  const sections: Child[] = [el("h1", {}, "bird decision sessions")];
  if (state.error !== null) {
    sections.push(el("div", { id: "error", role: "alert" }, state.error));
  }
  sections.push(renderSetup(state, actions));
  if (state.session !== null) {
    sections.push(renderSession(state.session, state.busy, actions));
  }
  sections.push(renderLog(log));
  root.replaceChildren(...sections);
}

function renderSetup(state: AppState, actions: Actions): HTMLElement {
  const select = el("select", { id: "scenario-select" });
  for (const scenario of state.scenarios) {
    select.append(el("option", { value: scenario.scenario_id }, scenario.text));
  }
  const condition = el("textarea", {
    id: "condition-input",
    rows: "2",
    placeholder: "Optional condition, e.g. how you plan to use it",
  });
  const start = el("button", { id: "start" }, "Start session");
  start.disabled = state.busy || state.scenarios.length === 0;
  start.onclick = () => actions.start(select.value, condition.value.trim());
  return el("section", { id: "setup" }, el("label", {}, "Scenario ", select), condition, start);
}

function renderSession(session: SessionView, busy: boolean, actions: Actions): HTMLElement {
  return el(
    "section",
    { id: "session", "data-session-id": session.session_id },
    el("p", { id: "scenario-text" }, session.scenario_text),
    renderEstimate(session),
    renderConditionRow(busy, actions),
    renderQuestionPanel(session, busy, actions),
    renderFactorPanel(session, busy, actions),
    renderHistory(session.history),
  );
}

function renderEstimate(session: SessionView): HTMLElement {
  const estimate = session.estimate;
  const [label1, label2] = barLabels(estimate.p_outcome1);
  const [width1, width2] = barWidths(estimate.p_outcome1);
  const segment1 = el("span", { id: "label-outcome1", class: "bar-outcome1" }, label1);
  segment1.style.width = width1;
  const segment2 = el("span", { id: "label-outcome2", class: "bar-outcome2" }, label2);
  segment2.style.width = width2;
  const panel = el(
    "div",
    { id: "estimate" },
    el(
      "div",
      { class: "bar-names" },
      el("span", {}, session.outcome1),
      el("span", {}, session.outcome2),
    ),
    el("div", { class: "bar" }, segment1, segment2),
    el(
      "p",
      { class: "exact" },
      "exact ",
      el("span", { id: "p-outcome1" }, exactProbability(estimate.p_outcome1)),
      " / ",
      el("span", { id: "p-outcome2" }, exactProbability(estimate.p_outcome2)),
      " · leaning ",
      el("span", { id: "verdict" }, verdictText(session)),
    ),
  );
  if (estimate.verdict === "unknown") {
    panel.append(el("p", { id: "verdict-note" }, "no factors implied yet"));
  }
  panel.append(renderContributions(estimate));
  return panel;
}

function renderContributions(estimate: EstimateView): HTMLElement {
  const rows = estimate.contributions.map((contribution) => {
    const values = Object.entries(contribution.values)
      .map(([factorId, valueId]) => `${factorId}=${valueId}`)
      .join(", ");
    const share = `weight ${exactProbability(contribution.weight)}`;
    const pooled = `P(outcome 1) ${exactProbability(contribution.p_outcome1)}`;
    return el("li", {}, `${values} · ${share} · ${pooled}`);
  });
  return el(
    "details",
    { id: "contributions" },
    el("summary", {}, `contributions (${rows.length})`),
    el("ul", {}, ...rows),
  );
}

function renderConditionRow(busy: boolean, actions: Actions): HTMLElement {
  const input = el("input", {
    id: "condition-more",
    type: "text",
    placeholder: "Add another condition",
  });
  const button = el("button", { id: "add-condition" }, "Add condition");
  button.disabled = busy;
  button.onclick = () => {
    const text = input.value.trim();
    if (text !== "") {
      actions.addCondition(text);
    }
  };
  return el("div", { id: "condition-row" }, input, button);
}

function renderQuestionPanel(session: SessionView, busy: boolean, actions: Actions): HTMLElement {
  const pending = session.pending_question;
  const ask = el("button", { id: "ask" }, "Ask a follow-up question");
  ask.disabled = busy || pending !== null;
  ask.onclick = () => actions.ask();
  const yes = el("button", { id: "answer-yes" }, "Yes");
  const no = el("button", { id: "answer-no" }, "No");
  yes.disabled = busy || pending === null;
  no.disabled = busy || pending === null;
  yes.onclick = () => actions.answer("yes");
  no.onclick = () => actions.answer("no");
  const question = el("p", { id: "question-text" }, pending === null ? "" : pending.question_text);
  if (pending !== null) {
    question.dataset.factorId = pending.factor_id;
    question.dataset.valueId = pending.value_id;
  }
  return el("div", { id: "question-panel" }, ask, question, yes, no);
}

function renderFactorPanel(session: SessionView, busy: boolean, actions: Actions): HTMLElement {
  const panel = el("section", { id: "factors" });
  for (const factor of session.factors) {
    panel.append(renderFactor(factor, busy, actions));
  }
  return panel;
}

function renderFactor(factor: FactorView, busy: boolean, actions: Actions): HTMLElement {
  const note = factor.observed_value_id === null ? "unobserved" : `observed: ${factor.observed_value_id}`;
  const box = el("fieldset", { class: "factor", "data-factor-id": factor.factor_id });
  box.append(el("legend", {}, `${factor.name} (${note})`));
  for (const value of factor.values) {
    box.append(renderValueRow(factor, value, busy, actions));
  }
  return box;
}

function renderValueRow(
  factor: FactorView,
  value: ValueView,
  busy: boolean,
  actions: Actions,
): HTMLElement {
  const slider = el("input", {
    type: "range",
    min: "0",
    max: "1",
    step: "0.01",
    class: "override-slider",
    "data-factor-id": factor.factor_id,
    "data-value-id": value.value_id,
  });
  slider.value = String(value.p);
  slider.disabled = busy;
  slider.onchange = () => actions.override(factor.factor_id, value.value_id, Number(slider.value));
  const flags = [value.observed ? "observed" : "", value.overridden ? "overridden" : ""]
    .filter((flag) => flag !== "")
    .join(" ");
  return el(
    "div",
    { class: "value-row", "data-value-id": value.value_id },
    el("span", { class: "value-text" }, value.text),
    el("span", { class: "value-support" }, `supports ${value.support}`),
    el("span", { class: "value-p" }, `P(outcome 1) ${exactProbability(value.p)}`),
    el("span", { class: "value-flags" }, flags),
    slider,
  );
}

function renderHistory(history: HistoryItem[]): HTMLElement {
  const items = history.map((item: HistoryItem) => {
    const after = exactProbability(item.estimate_after.p_outcome1);
    return el("li", {}, `${item.event} ${JSON.stringify(item.detail)} → P(outcome 1) ${after}`);
  });
  return el(
    "section",
    { id: "timeline" },
    el("h2", {}, "timeline"),
    el("ol", { id: "history" }, ...items),
  );
}

function renderLog(log: RequestLogEntry[]): HTMLElement {
  const lines = log.map((entry) => el("li", {}, `${entry.method} ${entry.path} → ${entry.status}`));
  return el(
    "footer",
    { id: "request-log", "data-count": String(log.length) },
    el(
      "details",
      {},
      el("summary", {}, `request log (${log.length})`),
      el("ol", {}, ...lines),
    ),
  );
}
