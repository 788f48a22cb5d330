import { spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, afterEach, beforeAll, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.ts";
import { mountApp } from "../src/app.ts";

const PORT = Number(process.env.BIRD_WEB_E2E_PORT ?? "8742");
const BASE_URL = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");

const WALKING = "You will be walking around the room.";
const RED_CASE = "The phone case is red.";

let server: ChildProcess;
const roots: HTMLDivElement[] = [];

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "bird.cli", "--config", "fixtures/demo/config.json", "serve", "--port", String(PORT)],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${BASE_URL}/health`);
      if (response.ok) {
        break;
      }
    } catch {
      // service still booting
    }
    if (Date.now() > deadline) {
      throw new Error("decision service did not come up");
    }
    await sleep(250);
  }
}, 40_000);

afterAll(() => {
  server.kill();
});

afterEach(() => {
  for (const root of roots.splice(0)) {
    root.remove();
  }
});

function mount(): { root: HTMLDivElement; client: ApiClient } {
  const root = document.createElement("div");
  document.body.append(root);
  roots.push(root);
  const client = new ApiClient(BASE_URL);
  mountApp(root, client);
  return { root, client };
}

function q<T extends Element>(root: HTMLElement, selector: string): T {
  const node = root.querySelector(selector);
  if (node === null) {
    throw new Error(`missing element ${selector}`);
  }
  return node as T;
}

function textOf(root: HTMLElement, selector: string): string {
  return q(root, selector).textContent ?? "";
}

/** Waits until the rendered request log shows exactly `count` round-trips. */
async function settle(root: HTMLElement, count: number): Promise<void> {
  const deadline = Date.now() + 10_000;
  for (;;) {
    const footer = root.querySelector("#request-log");
    const current = footer?.getAttribute("data-count");
    if (current === String(count)) {
      return;
    }
    if (Number(current) > count) {
      throw new Error(`expected ${count} round-trips, saw ${current}`);
    }
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for round-trip ${count}, saw ${current}`);
    }
    await sleep(20);
  }
}

/** The two bar labels, which must sum to exactly 1.00 at every step. */
function labelSum(root: HTMLElement): number {
  const first = Number(textOf(root, "#label-outcome1"));
  const second = Number(textOf(root, "#label-outcome2"));
  return (Math.round(first * 100) + Math.round(second * 100)) / 100;
}

function exactSum(root: HTMLElement): number {
  return Number(textOf(root, "#p-outcome1")) + Number(textOf(root, "#p-outcome2"));
}

function expectDisplayedSumIsOne(root: HTMLElement): void {
  expect(labelSum(root)).toBe(1);
  expect(Math.abs(exactSum(root) - 1)).toBeLessThan(1e-9);
}

async function startSession(root: HTMLElement, condition: string): Promise<void> {
  await settle(root, 1);
  q<HTMLTextAreaElement>(root, "#condition-input").value = condition;
  q<HTMLButtonElement>(root, "#start").click();
  await settle(root, 2);
}

describe("scripted session against the fixture-backed service", () => {
  it("walks create, question, yes, override: 0.825 then 0.9 then the overridden value", async () => {
    const { root, client } = mount();

    await startSession(root, WALKING);
    expect(client.log[1]).toEqual({ method: "POST", path: "/sessions", status: 201 });
    expect(textOf(root, "#p-outcome1")).toBe("0.825");
    expect(textOf(root, "#p-outcome2")).toBe("0.175");
    expect(textOf(root, "#label-outcome1")).toBe("0.83");
    expect(textOf(root, "#verdict")).toBe("Choose the longer cord");
    expectDisplayedSumIsOne(root);

    const sessionId = q<HTMLElement>(root, "#session").dataset.sessionId;
    expect(sessionId).toBeTruthy();

    q<HTMLButtonElement>(root, "#ask").click();
    await settle(root, 3);
    expect(client.log[2]).toEqual({
      method: "POST",
      path: `/sessions/${sessionId}/question`,
      status: 200,
    });
    const question = q<HTMLParagraphElement>(root, "#question-text");
    expect(question.textContent).toBe("Is the outlet far from where you use the phone?");
    expect(question.dataset.factorId).toBe("f2");
    expect(question.dataset.valueId).toBe("f2v1");
    expect(textOf(root, "#p-outcome1")).toBe("0.825");
    expectDisplayedSumIsOne(root);

    q<HTMLButtonElement>(root, "#answer-yes").click();
    await settle(root, 4);
    expect(client.log[3]).toEqual({
      method: "POST",
      path: `/sessions/${sessionId}/answer`,
      status: 200,
    });
    expect(textOf(root, "#p-outcome1")).toBe("0.9");
    expect(textOf(root, "#p-outcome2")).toBe("0.1");
    expect(textOf(root, "#label-outcome1")).toBe("0.90");
    expectDisplayedSumIsOne(root);

    const slider = q<HTMLInputElement>(
      root,
      'input.override-slider[data-factor-id="f1"][data-value-id="f1v1"]',
    );
    expect(slider.value).toBe("0.75");
    slider.value = "0.6";
    slider.dispatchEvent(new Event("change"));
    await settle(root, 5);
    expect(client.log[4]).toEqual({
      method: "POST",
      path: `/sessions/${sessionId}/override`,
      status: 200,
    });
    expect(textOf(root, "#p-outcome1")).toBe("0.818181818182");
    expect(textOf(root, "#p-outcome2")).toBe("0.181818181818");
    expect(textOf(root, "#label-outcome1")).toBe("0.82");
    expect(textOf(root, '.value-row[data-value-id="f1v1"] .value-flags')).toContain("overridden");
    expectDisplayedSumIsOne(root);

    const historyEvents = [...root.querySelectorAll("#history li")].map(
      (item) => item.textContent?.split(" ")[0],
    );
    expect(historyEvents).toEqual(["created", "question", "answer", "override"]);
  }, 30_000);

  it("shows the unknown state with the question button enabled", async () => {
    const { root } = mount();
    await startSession(root, RED_CASE);
    expect(textOf(root, "#verdict-note")).toBe("no factors implied yet");
    expect(textOf(root, "#p-outcome1")).toBe("0.6");
    expect(q<HTMLButtonElement>(root, "#ask").disabled).toBe(false);
    expectDisplayedSumIsOne(root);
  }, 30_000);

  it("keeps the estimate unchanged for an identity override", async () => {
    const { root } = mount();
    await startSession(root, WALKING);
    const slider = q<HTMLInputElement>(
      root,
      'input.override-slider[data-factor-id="f1"][data-value-id="f1v1"]',
    );
    expect(slider.value).toBe("0.75");
    slider.dispatchEvent(new Event("change"));
    await settle(root, 3);
    expect(textOf(root, "#p-outcome1")).toBe("0.825");
    expect(textOf(root, '.value-row[data-value-id="f1v1"] .value-flags')).toContain("overridden");
    expectDisplayedSumIsOne(root);
  }, 30_000);

  it("surfaces service errors inline and keeps the confirmed state", async () => {
    const { root, client } = mount();
    await startSession(root, WALKING);
    q<HTMLInputElement>(root, "#condition-more").value = "Something never recorded.";
    q<HTMLButtonElement>(root, "#add-condition").click();
    await settle(root, 3);
    expect(client.log[2]?.status).toBe(503);
    expect(textOf(root, "#error")).not.toBe("");
    expect(textOf(root, "#p-outcome1")).toBe("0.825");
  }, 30_000);
});
