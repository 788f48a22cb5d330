import type { ScenarioSummary, SessionView } from "./types.ts";

/** Client state: the scenario catalog plus the single active session. */
export interface AppState {
  scenarios: ScenarioSummary[];
  session: SessionView | null;
  busy: boolean;
  error: string | null;
}

/** Events folded into the state; each mirrors one confirmed server response. */
export type ClientEvent =
  | { type: "ScenarioList"; scenarios: ScenarioSummary[] }
  | { type: "RequestStarted" }
  | { type: "SessionUpdate"; session: SessionView }
  | { type: "RequestFailed"; message: string };

/** The state before anything has loaded. */
export function initialState(): AppState {
  return { scenarios: [], session: null, busy: false, error: null };
}

/** ScenarioList → replaces the scenario catalog. */
export function scenarioListSlice(state: AppState, event: ClientEvent): AppState {
  if (event.type !== "ScenarioList") return state;
  return { ...state, scenarios: event.scenarios };
}

/** RequestStarted → marks the client busy and clears any stale error. */
export function requestStartedSlice(state: AppState, event: ClientEvent): AppState {
  if (event.type !== "RequestStarted") return state;
  return { ...state, busy: true, error: null };
}

/** SessionUpdate → adopts the server snapshot as the whole session truth. */
export function sessionUpdateSlice(state: AppState, event: ClientEvent): AppState {
  if (event.type !== "SessionUpdate") return state;
  return { ...state, session: event.session, busy: false, error: null };
}

/** RequestFailed → surfaces the error inline and re-enables the controls. */
export function requestFailedSlice(state: AppState, event: ClientEvent): AppState {
  if (event.type !== "RequestFailed") return state;
  return { ...state, busy: false, error: event.message };
}

const SLICES = [
  scenarioListSlice,
  requestStartedSlice,
  sessionUpdateSlice,
  requestFailedSlice,
];

/** Applies every slice in order; exactly one reacts to any given event. */
export function foldEvent(state: AppState, event: ClientEvent): AppState {
  return SLICES.reduce((next, slice) => slice(next, event), state);
}
