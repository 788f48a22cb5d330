import type { HealthView, ScenarioSummary, SessionView } from "./types.ts";

/** One request-log line; every state transition should add exactly one. */
export interface RequestLogEntry {
  method: string;
  path: string;
  status: number;
}

/** Error carrying the HTTP status and the service's detail message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

function describeDetail(payload: unknown): string {
  if (typeof payload === "object" && payload !== null && "detail" in payload) {
    const detail = (payload as { detail: unknown }).detail;
    return typeof detail === "string" ? detail : JSON.stringify(detail);
  }
  return JSON.stringify(payload);
}

/** Thin typed client for the decision service. Does no probability math. */
export class ApiClient {
  readonly log: RequestLogEntry[] = [];

  constructor(readonly baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    this.log.push({ method, path, status: response.status });
    const payload: unknown = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, describeDetail(payload));
    }
    return payload as T;
  }

  health(): Promise<HealthView> {
    return this.request("GET", "/health");
  }

  scenarios(): Promise<ScenarioSummary[]> {
    return this.request("GET", "/scenarios");
  }

  createSession(scenarioId: string, conditionText?: string): Promise<SessionView> {
    return this.request("POST", "/sessions", {
      scenario_id: scenarioId,
      condition_text: conditionText ?? null,
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  addCondition(sessionId: string, text: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/condition`, { text });
  }

  askQuestion(sessionId: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/question`);
  }

  answer(sessionId: string, answer: "yes" | "no"): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/answer`, { answer });
  }

  override(sessionId: string, factorId: string, valueId: string, p: number): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/override`, {
      factor_id: factorId,
      value_id: valueId,
      p,
    });
  }
}
