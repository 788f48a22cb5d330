import type { ScenarioSummary, SessionView } from "../src/types.ts";

/** The demo catalog entry as the service lists it. */
export function demoScenario(): ScenarioSummary {
  return {
    scenario_id: "demo-cord",
    text: "You want to charge your phone while still using it.",
    outcome1: "Choose the longer cord",
    outcome2: "Choose the shorter cord",
    factor_count: 2,
    trained: true,
  };
}

/** A server snapshot right after a condition observed movement (f1v1). */
export function demoSession(): SessionView {
  return {
    session_id: "s-1",
    scenario_id: "demo-cord",
    scenario_text: "You want to charge your phone while still using it.",
    outcome1: "Choose the longer cord",
    outcome2: "Choose the shorter cord",
    observation: { f1: "f1v1" },
    estimate: {
      p_outcome1: 0.825,
      p_outcome2: 0.175,
      verdict: "outcome1",
      kind: "trained",
      contributions: [
        { values: { f1: "f1v1", f2: "f2v1" }, weight: 0.5, p_outcome1: 0.9 },
        { values: { f1: "f1v1", f2: "f2v2" }, weight: 0.5, p_outcome1: 0.75 },
      ],
    },
    factors: [
      {
        factor_id: "f1",
        name: "Movement while charging",
        observed_value_id: "f1v1",
        values: [
          {
            value_id: "f1v1",
            text: "You will walk around the room while the phone charges",
            support: "outcome1",
            p: 0.75,
            observed: true,
            overridden: false,
          },
          {
            value_id: "f1v2",
            text: "You will stay seated next to the outlet",
            support: "outcome2",
            p: 0.25,
            observed: false,
            overridden: false,
          },
        ],
      },
      {
        factor_id: "f2",
        name: "Distance to the outlet",
        observed_value_id: null,
        values: [
          {
            value_id: "f2v1",
            text: "The outlet is far from where you use the phone",
            support: "outcome1",
            p: 0.75,
            observed: false,
            overridden: false,
          },
          {
            value_id: "f2v2",
            text: "The outlet is within arm's reach",
            support: "neutral",
            p: 0.5,
            observed: false,
            overridden: false,
          },
        ],
      },
    ],
    pending_question: null,
    overrides: [],
    history: [
      {
        event: "condition",
        detail: { text: "You will be walking around the room." },
        estimate_after: {
          p_outcome1: 0.825,
          p_outcome2: 0.175,
          verdict: "outcome1",
          kind: "trained",
          contributions: [],
        },
      },
    ],
    loss_trace: [],
  };
}
