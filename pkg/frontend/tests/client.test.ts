import { describe, expect, it, vi } from "vitest";

import { ServiceError, SessionClient } from "../src/client.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

const stepEvent = {
  type: "step",
  t: 1,
  payload: {
    action: 0,
    recourse: [0.1],
    ucb: 1.0,
    lcb: 0.0,
    ci: 0.5,
    source: "AI",
    regret_step: 0.0,
    regret_cum: 0.0,
    queried: false,
    adopted: false,
    reward: 1.0,
    context: [0.0],
  },
};

describe("SessionClient", () => {
  it("creates a session and returns its id", async () => {
    const fetchImpl = vi.fn(async () => jsonResponse(200, { id: "abc123" }));
    const client = new SessionClient("http://host:1", fetchImpl as unknown as typeof fetch);
    expect(await client.createSession({ horizon: 5, seeds: [0] })).toBe("abc123");
    const [url, init] = fetchImpl.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("http://host:1/sessions");
    expect(JSON.parse(init.body as string)).toEqual({ horizon: 5, seeds: [0] });
  });

  it("throws a ServiceError with the rejection detail", async () => {
    const fetchImpl = vi.fn(async () => jsonResponse(422, { detail: { error: "bad config" } }));
    const client = new SessionClient("http://host:1", fetchImpl as unknown as typeof fetch);
    await expect(client.createSession({})).rejects.toMatchObject({
      status: 422,
      detail: { error: "bad config" },
    });
  });

  it("parses and validates advance responses", async () => {
    const fetchImpl = vi.fn(async () => jsonResponse(200, stepEvent));
    const client = new SessionClient("http://host:1", fetchImpl as unknown as typeof fetch);
    const event = await client.advance("abc");
    expect(event.type).toBe("step");
  });

  it("rejects a malformed advance payload", async () => {
    const fetchImpl = vi.fn(async () => jsonResponse(200, { type: "step", t: 1, payload: {} }));
    const client = new SessionClient("http://host:1", fetchImpl as unknown as typeof fetch);
    await expect(client.advance("abc")).rejects.toThrow();
  });

  it("reports a stale submission instead of throwing", async () => {
    const fetchImpl = vi.fn(async () =>
      jsonResponse(409, { detail: { error: "stale submission: deadline elapsed" } }),
    );
    const client = new SessionClient("http://host:1", fetchImpl as unknown as typeof fetch);
    const result = await client.submitHuman("abc", 0, [0.1]);
    expect(result.ok).toBe(false);
    expect(result.stale).toBe(true);
  });

  it("throws on a non-stale submission rejection", async () => {
    const fetchImpl = vi.fn(async () =>
      jsonResponse(422, { detail: { error: "recourse outside the budget", constraint: "two-norm" } }),
    );
    const client = new SessionClient("http://host:1", fetchImpl as unknown as typeof fetch);
    await expect(client.submitHuman("abc", 0, [9.9])).rejects.toBeInstanceOf(ServiceError);
  });

  it("returns the raw CSV text from the log endpoint", async () => {
    const fetchImpl = vi.fn(async () => new Response("t,action\n1,0\n", { status: 200 }));
    const client = new SessionClient("http://host:1", fetchImpl as unknown as typeof fetch);
    expect(await client.fetchLog("abc")).toBe("t,action\n1,0\n");
  });

  it("streams events through an injected WebSocket and validates them", () => {
    const sockets: FakeSocket[] = [];
    class FakeSocket {
      onmessage: ((msg: { data: string }) => void) | null = null;
      onerror: ((err: unknown) => void) | null = null;
      closed = false;
      constructor(public url: string) {
        sockets.push(this);
      }
      close() {
        this.closed = true;
      }
    }
    const client = new SessionClient("http://host:1", vi.fn() as unknown as typeof fetch);
    const events: string[] = [];
    const errors: unknown[] = [];
    const close = client.stream(
      "abc",
      (e) => events.push(e.type),
      (e) => errors.push(e),
      FakeSocket as unknown as typeof WebSocket,
    );
    expect(sockets[0].url).toBe("ws://host:1/sessions/abc/stream");
    sockets[0].onmessage?.({ data: JSON.stringify(stepEvent) });
    sockets[0].onmessage?.({ data: JSON.stringify({ type: "junk" }) });
    expect(events).toEqual(["step"]);
    expect(errors).toHaveLength(1);
    close();
    expect(sockets[0].closed).toBe(true);
  });
});
