/**
 * HTTP/WebSocket client for the session service. All responses are validated
 * against the event schemas before they reach the view state.
 */

import { parseEvent, type SessionEvent } from "./validation.js";

export interface SessionConfig {
  horizon?: number;
  seeds?: number[];
  env?: string;
  gamma?: number;
  delta_consult?: number;
  zeta?: number;
  timeout?: number;
  [key: string]: unknown;
}

export interface SubmitResult {
  ok: boolean;
  event?: SessionEvent;
  stale?: boolean;
  detail?: unknown;
}

type FetchLike = typeof fetch;

export class ServiceError extends Error {
  constructor(
    message: string,
    public status: number,
    public detail: unknown,
  ) {
    super(message);
  }
}

export class SessionClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    return this.fetchImpl(`${this.baseUrl}${path}`, init);
  }

  async createSession(config: SessionConfig): Promise<string> {
    const res = await this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
    const body = await res.json();
    if (!res.ok) throw new ServiceError("session rejected", res.status, body.detail ?? body);
    return body.id as string;
  }

  async advance(id: string): Promise<SessionEvent> {
    const res = await this.request(`/sessions/${id}/advance`, { method: "POST" });
    const body = await res.json();
    if (!res.ok) throw new ServiceError("advance failed", res.status, body.detail ?? body);
    return parseEvent(body);
  }

  /** Submit an expert answer. A stale rejection (the deadline already fired)
   * is reported, not thrown, so the view can resync instead of erroring. */
  async submitHuman(id: string, action: number, recourse: number[]): Promise<SubmitResult> {
    const res = await this.request(`/sessions/${id}/human`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ action, recourse }),
    });
    const body = await res.json();
    if (res.ok) return { ok: true, event: parseEvent(body) };
    const detail = body.detail ?? body;
    const stale =
      res.status === 409 && typeof detail?.error === "string" && detail.error.includes("stale");
    if (stale) return { ok: false, stale: true, detail };
    throw new ServiceError("submission rejected", res.status, detail);
  }

  async snapshot(id: string): Promise<Record<string, unknown>> {
    const res = await this.request(`/sessions/${id}`);
    const body = await res.json();
    if (!res.ok) throw new ServiceError("snapshot failed", res.status, body.detail ?? body);
    return body;
  }

  async fetchLog(id: string): Promise<string> {
    const res = await this.request(`/sessions/${id}/log`);
    if (!res.ok) throw new ServiceError("log fetch failed", res.status, await res.text());
    return res.text();
  }

  /** Subscribe to the ordered event stream. Returns a close function. */
  stream(
    id: string,
    onEvent: (event: SessionEvent) => void,
    onError: (err: unknown) => void,
    WebSocketImpl: typeof WebSocket = WebSocket,
  ): () => void {
    const wsUrl = this.baseUrl.replace(/^http/, "ws");
    const socket = new WebSocketImpl(`${wsUrl}/sessions/${id}/stream`);
    socket.onmessage = (msg: MessageEvent) => {
      try {
        onEvent(parseEvent(JSON.parse(String(msg.data))));
      } catch (err) {
        onError(err);
      }
    };
    socket.onerror = (err: unknown) => onError(err);
    return () => socket.close();
  }
}
