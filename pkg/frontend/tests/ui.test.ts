import { beforeEach, describe, expect, it, vi } from "vitest";
import { initialState } from "../src/state.ts";
import type { AppState } from "../src/state.ts";
import type { SessionView } from "../src/types.ts";
import { render } from "../src/ui.ts";
import type { Actions } from "../src/ui.ts";
import { demoScenario, demoSession } from "./fixtures.ts";

let root: HTMLDivElement;
let actions: {
  start: ReturnType<typeof vi.fn>;
  addCondition: ReturnType<typeof vi.fn>;
  ask: ReturnType<typeof vi.fn>;
  answer: ReturnType<typeof vi.fn>;
  override: ReturnType<typeof vi.fn>;
};

beforeEach(() => {
  root = document.createElement("div");
  actions = {
    start: vi.fn(),
    addCondition: vi.fn(),
    ask: vi.fn(),
    answer: vi.fn(),
    override: vi.fn(),
  };
});

function draw(state: AppState): void {
  render(root, state, actions as unknown as Actions, []);
}

function sessionState(session: SessionView): AppState {
  return { ...initialState(), scenarios: [demoScenario()], session };
}

function q<T extends Element>(selector: string): T {
  const node = root.querySelector(selector);
  if (node === null) {
    throw new Error(`missing element ${selector}`);
  }
  return node as T;
}

function textOf(selector: string): string {
  return q(selector).textContent ?? "";
}

describe("estimate panel", () => {
  it("shows the exact wire probabilities and two-decimal bar labels", () => {
    draw(sessionState(demoSession()));
    expect(textOf("#p-outcome1")).toBe("0.825");
    expect(textOf("#p-outcome2")).toBe("0.175");
    expect(textOf("#label-outcome1")).toBe("0.83");
    expect(textOf("#label-outcome2")).toBe("0.17");
    expect(q<HTMLSpanElement>("#label-outcome1").style.width).toBe("83%");
    expect(textOf("#verdict")).toBe("Choose the longer cord");
    expect(root.querySelector("#verdict-note")).toBeNull();
  });

  it("lists each contribution with its weight and pooled probability", () => {
    draw(sessionState(demoSession()));
    const rows = [...root.querySelectorAll("#contributions li")].map((row) => row.textContent);
    expect(rows).toEqual([
      "f1=f1v1, f2=f2v1 · weight 0.5 · P(outcome 1) 0.9",
      "f1=f1v1, f2=f2v2 · weight 0.5 · P(outcome 1) 0.75",
    ]);
  });

  it("shows the unknown state with the question button enabled", () => {
    const session = demoSession();
    session.observation = {};
    session.estimate = {
      p_outcome1: 0.6,
      p_outcome2: 0.4,
      verdict: "unknown",
      kind: "trained",
      contributions: [],
    };
    draw(sessionState(session));
    expect(textOf("#verdict-note")).toBe("no factors implied yet");
    expect(q<HTMLButtonElement>("#ask").disabled).toBe(false);
  });
});

describe("question panel", () => {
  it("disables the answer buttons while no question is pending", () => {
    draw(sessionState(demoSession()));
    expect(q<HTMLButtonElement>("#answer-yes").disabled).toBe(true);
    expect(q<HTMLButtonElement>("#answer-no").disabled).toBe(true);
    expect(q<HTMLButtonElement>("#ask").disabled).toBe(false);
  });

  it("shows the pending question and forwards the answer", () => {
    const session = demoSession();
    session.pending_question = {
      factor_id: "f2",
      value_id: "f2v1",
      question_text: "Is the outlet far from where you use the phone?",
    };
    draw(sessionState(session));
    expect(q<HTMLButtonElement>("#ask").disabled).toBe(true);
    const question = q<HTMLParagraphElement>("#question-text");
    expect(question.textContent).toBe("Is the outlet far from where you use the phone?");
    expect(question.dataset.factorId).toBe("f2");
    expect(question.dataset.valueId).toBe("f2v1");
    q<HTMLButtonElement>("#answer-yes").click();
    expect(actions.answer).toHaveBeenCalledWith("yes");
  });
});

describe("setup panel", () => {
  it("starts a session with the picked scenario and trimmed condition", () => {
    draw({ ...initialState(), scenarios: [demoScenario()] });
    q<HTMLTextAreaElement>("#condition-input").value = "  You will be walking around.  ";
    q<HTMLButtonElement>("#start").click();
    expect(actions.start).toHaveBeenCalledWith("demo-cord", "You will be walking around.");
  });

  it("disables the start button until scenarios arrive", () => {
    draw(initialState());
    expect(q<HTMLButtonElement>("#start").disabled).toBe(true);
  });

  it("ignores blank extra conditions", () => {
    draw(sessionState(demoSession()));
    q<HTMLInputElement>("#condition-more").value = "   ";
    q<HTMLButtonElement>("#add-condition").click();
    expect(actions.addCondition).not.toHaveBeenCalled();
  });
});

describe("factor panel", () => {
  it("marks observed factors and renders one slider per value", () => {
    draw(sessionState(demoSession()));
    const legends = [...root.querySelectorAll("fieldset.factor legend")].map(
      (legend) => legend.textContent,
    );
    expect(legends).toEqual([
      "Movement while charging (observed: f1v1)",
      "Distance to the outlet (unobserved)",
    ]);
    expect(root.querySelectorAll("input.override-slider")).toHaveLength(4);
    expect(textOf('.value-row[data-value-id="f1v1"] .value-flags')).toBe("observed");
  });

  it("posts an override when a slider settles on a new value", () => {
    draw(sessionState(demoSession()));
    const slider = q<HTMLInputElement>(
      'input.override-slider[data-factor-id="f1"][data-value-id="f1v1"]',
    );
    expect(slider.value).toBe("0.75");
    slider.value = "0.6";
    slider.dispatchEvent(new Event("change"));
    expect(actions.override).toHaveBeenCalledWith("f1", "f1v1", 0.6);
  });

  it("flags overridden values", () => {
    const session = demoSession();
    session.factors[0]!.values[0]!.overridden = true;
    draw(sessionState(session));
    expect(textOf('.value-row[data-value-id="f1v1"] .value-flags')).toBe("observed overridden");
  });
});

describe("timeline and diagnostics", () => {
  it("renders one line per history event with the estimate after it", () => {
    draw(sessionState(demoSession()));
    const items = [...root.querySelectorAll("#history li")].map((item) => item.textContent);
    expect(items).toEqual([
      'condition {"text":"You will be walking around the room."} → P(outcome 1) 0.825',
    ]);
  });

  it("renders the request log and inline errors", () => {
    const state = { ...initialState(), scenarios: [demoScenario()], error: "service unreachable" };
    render(root, state, actions as unknown as Actions, [
      { method: "GET", path: "/scenarios", status: 200 },
      { method: "POST", path: "/sessions", status: 503 },
    ]);
    expect(textOf("#error")).toBe("service unreachable");
    expect(q<HTMLElement>("#request-log").dataset.count).toBe("2");
    const lines = [...root.querySelectorAll("#request-log li")].map((line) => line.textContent);
    expect(lines).toEqual(["GET /scenarios → 200", "POST /sessions → 503"]);
  });

  it("disables every control while a request is in flight", () => {
    const state = { ...sessionState(demoSession()), busy: true };
    draw(state);
    expect(q<HTMLButtonElement>("#start").disabled).toBe(true);
    expect(q<HTMLButtonElement>("#ask").disabled).toBe(true);
    expect(q<HTMLButtonElement>("#add-condition").disabled).toBe(true);
    const sliders = [...root.querySelectorAll<HTMLInputElement>("input.override-slider")];
    expect(sliders.every((slider) => slider.disabled)).toBe(true);
  });
});
