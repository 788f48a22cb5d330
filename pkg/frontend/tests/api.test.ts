import { afterEach, describe, expect, it, vi } from "vitest";
import { ApiClient, ApiError } from "../src/api.ts";
import { demoSession } from "./fixtures.ts";

function stubFetch(payload: unknown, status = 200) {
  const mock = vi.fn().mockImplementation(() =>
    Promise.resolve(
      new Response(JSON.stringify(payload), {
        status,
        headers: { "Content-Type": "application/json" },
      }),
    ),
  );
  vi.stubGlobal("fetch", mock);
  return mock;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ApiClient", () => {
  it("prefixes paths with the base url", async () => {
    const mock = stubFetch([]);
    await new ApiClient("http://api.test").scenarios();
    expect(mock).toHaveBeenCalledWith("http://api.test/scenarios", {
      method: "GET",
      headers: undefined,
      body: undefined,
    });
  });

  it("posts the scenario and condition on createSession", async () => {
    const mock = stubFetch(demoSession(), 201);
    const session = await new ApiClient().createSession("demo-cord", "walking");
    expect(session.session_id).toBe("s-1");
    const [, init] = mock.mock.calls[0] as [string, RequestInit];
    expect(init.headers).toEqual({ "Content-Type": "application/json" });
    expect(JSON.parse(init.body as string)).toEqual({
      scenario_id: "demo-cord",
      condition_text: "walking",
    });
  });

  it("sends a null condition when none is given", async () => {
    const mock = stubFetch(demoSession(), 201);
    await new ApiClient().createSession("demo-cord");
    const [, init] = mock.mock.calls[0] as [string, RequestInit];
    expect(JSON.parse(init.body as string)).toEqual({
      scenario_id: "demo-cord",
      condition_text: null,
    });
  });

  it("sends no body when asking for a question", async () => {
    const mock = stubFetch(demoSession());
    await new ApiClient().askQuestion("s-1");
    expect(mock).toHaveBeenCalledWith("/sessions/s-1/question", {
      method: "POST",
      headers: undefined,
      body: undefined,
    });
  });

  it("posts yes-or-no answers and overrides", async () => {
    const mock = stubFetch(demoSession());
    const client = new ApiClient();
    await client.answer("s-1", "yes");
    await client.override("s-1", "f1", "f1v1", 0.6);
    const [, answerInit] = mock.mock.calls[0] as [string, RequestInit];
    expect(JSON.parse(answerInit.body as string)).toEqual({ answer: "yes" });
    const [overridePath, overrideInit] = mock.mock.calls[1] as [string, RequestInit];
    expect(overridePath).toBe("/sessions/s-1/override");
    expect(JSON.parse(overrideInit.body as string)).toEqual({
      factor_id: "f1",
      value_id: "f1v1",
      p: 0.6,
    });
  });

  it("logs one entry per request with the response status", async () => {
    stubFetch([]);
    const client = new ApiClient();
    await client.scenarios();
    expect(client.log).toEqual([{ method: "GET", path: "/scenarios", status: 200 }]);
  });

  it("raises ApiError with the service detail message", async () => {
    stubFetch({ detail: "unknown session s-9" }, 404);
    const client = new ApiClient();
    const failure = await client.getSession("s-9").catch((error: unknown) => error);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).status).toBe(404);
    expect((failure as ApiError).message).toBe("unknown session s-9");
    expect(client.log).toEqual([{ method: "GET", path: "/sessions/s-9", status: 404 }]);
  });

  it("stringifies structured validation details", async () => {
    const detail = [{ loc: ["body", "p"], msg: "less than or equal to 1" }];
    stubFetch({ detail }, 422);
    const failure = await new ApiClient()
      .override("s-1", "f1", "f1v1", 1.5)
      .catch((error: unknown) => error);
    expect((failure as ApiError).message).toBe(JSON.stringify(detail));
  });
});
