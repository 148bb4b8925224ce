// Thin typed client for the /v1 JSON API. All state of record lives on the
// server; this client never computes lengths or completion itself.

import type {
  CurrentPuzzle,
  EditKind,
  EventAck,
  ProgramDoc,
  SessionInfo,
  SkipResponse,
  SubmitResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const payload = await res.json();
        if (payload && typeof payload.error === "string") detail = payload.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  createSession(condition: string, seed: number): Promise<SessionInfo> {
    return this.request("POST", "/v1/sessions", { condition, seed });
  }

  sessionInfo(sessionId: string): Promise<SessionInfo> {
    return this.request("GET", `/v1/sessions/${sessionId}`);
  }

  currentPuzzle(sessionId: string): Promise<CurrentPuzzle> {
    return this.request("GET", `/v1/sessions/${sessionId}/puzzle`);
  }

  submitProgram(sessionId: string, puzzleId: string, program: ProgramDoc): Promise<SubmitResponse> {
    return this.request("POST", `/v1/sessions/${sessionId}/submit`, {
      puzzle_id: puzzleId,
      program,
    });
  }

  skipPuzzle(sessionId: string, puzzleId: string, clientElapsedS: number): Promise<SkipResponse> {
    return this.request("POST", `/v1/sessions/${sessionId}/skip`, {
      puzzle_id: puzzleId,
      client_elapsed_s: clientElapsedS,
    });
  }

  logEvent(sessionId: string, kind: EditKind, payload: Record<string, unknown>): Promise<EventAck> {
    return this.request("POST", `/v1/sessions/${sessionId}/events`, { kind, payload });
  }
}
