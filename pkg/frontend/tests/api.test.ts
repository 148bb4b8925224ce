import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { tutorialPages } from "../src/tutorial.js";

function fakeFetch(status: number, body: unknown) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const impl = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { impl, calls };
}

describe("api client", () => {
  it("posts session creation with condition and seed", async () => {
    const { impl, calls } = fakeFetch(200, { session_id: "s1", condition: "default_flat" });
    const api = new ApiClient("", impl);
    const session = await api.createSession("default_flat", 7);
    expect(session.session_id).toBe("s1");
    expect(calls[0].url).toBe("/v1/sessions");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ condition: "default_flat", seed: 7 });
  });

  it("submits programs against the active puzzle", async () => {
    const { impl, calls } = fakeFetch(200, { valid: true, completed: false, counter_visible: false });
    const api = new ApiClient("", impl);
    await api.submitProgram("s1", "T1", { main: ["walk"], procs: [] });
    expect(calls[0].url).toBe("/v1/sessions/s1/submit");
    expect(JSON.parse(String(calls[0].init?.body)).puzzle_id).toBe("T1");
  });

  it("surfaces server errors with their message", async () => {
    const { impl } = fakeFetch(409, { error: "puzzle T2 is not the active puzzle" });
    const api = new ApiClient("", impl);
    await expect(api.skipPuzzle("s1", "T2", 0)).rejects.toThrowError(ApiError);
    await expect(api.skipPuzzle("s1", "T2", 0)).rejects.toThrow(/not the active puzzle/);
  });
});

describe("tutorial gating", () => {
  it("hierarchy conditions get subprocess and recursion pages", () => {
    const titles = tutorialPages(4, false).map((p) => p.title);
    expect(titles).toContain("Sub-processes");
    expect(titles).toContain("Recursion");
  });

  it("flat conditions get no subprocess pages", () => {
    const titles = tutorialPages(0, false).map((p) => p.title);
    expect(titles.join(" ")).not.toMatch(/Sub-process|Recursion/);
  });

  it("efficiency pages appear only with efficiency instructions", () => {
    expect(tutorialPages(0, true).map((p) => p.title)).toContain("Shorter is better");
    expect(tutorialPages(4, true).map((p) => p.title)).toContain("Smaller programs are better");
    const plain = tutorialPages(4, false).map((p) => p.title);
    expect(plain.join(" ")).not.toMatch(/better/);
  });
});
