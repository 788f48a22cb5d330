import { ApiClient } from "./api.ts";
import { foldEvent, initialState } from "./state.ts";
import type { AppState, ClientEvent } from "./state.ts";
import type { SessionView } from "./types.ts";
import { render } from "./ui.ts";
import type { Actions } from "./ui.ts";

function errorMessage(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}

/** Wires the fetch client, the event fold, and the renderer together. */
export function mountApp(root: HTMLElement, client: ApiClient): void {
  let state: AppState = initialState();

  const dispatch = (event: ClientEvent): void => {
    state = foldEvent(state, event);
    render(root, state, actions, client.log);
  };

  // Optimistic UI is forbidden: render only confirmed server snapshots.
  const run = (call: Promise<SessionView>): void => {
    dispatch({ type: "RequestStarted" });
    call.then(
      (session) => dispatch({ type: "SessionUpdate", session }),
      (error: unknown) => dispatch({ type: "RequestFailed", message: errorMessage(error) }),
    );
  };

  const sessionId = (): string => {
    if (state.session === null) {
      throw new Error("no active session");
    }
    return state.session.session_id;
  };

  const actions: Actions = {
    start: (scenarioId, conditionText) =>
      run(client.createSession(scenarioId, conditionText === "" ? undefined : conditionText)),
    addCondition: (text) => run(client.addCondition(sessionId(), text)),
    ask: () => run(client.askQuestion(sessionId())),
    answer: (answer) => run(client.answer(sessionId(), answer)),
    override: (factorId, valueId, p) => run(client.override(sessionId(), factorId, valueId, p)),
  };

  render(root, state, actions, client.log);
  client.scenarios().then(
    (scenarios) => dispatch({ type: "ScenarioList", scenarios }),
    (error: unknown) => dispatch({ type: "RequestFailed", message: errorMessage(error) }),
  );
}
