// Thin client for the session-service HTTP API. The fetch function is
// injectable so tests can run against a scripted transport.

import type { SubmissionPayload } from "./validation.js";

export interface CommentView {
  label: string;
  text: string;
}

export interface CaseView {
  case_id: string;
  kind: "benchmark_audit" | "model_comparison";
  code: string;
  position: number;
  total: number;
  accumulated_seconds: number;
  comment?: string;
  comments?: CommentView[];
}

export interface SessionHandle {
  session_id: string;
  token: string;
  case_count: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`session service returned ${status}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SessionClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json();
    if (!response.ok) throw new ApiError(response.status, body.detail ?? body);
    return body as T;
  }

  createSession(
    evaluatorId: string,
    kind: string,
    caseIds: string[],
    seed: number,
  ): Promise<SessionHandle> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ evaluator_id: evaluatorId, kind, case_ids: caseIds, seed }),
    });
  }

  async nextCase(handle: SessionHandle): Promise<CaseView | null> {
    const body = await this.request<{ done: boolean; case?: CaseView }>(
      `/sessions/${handle.session_id}/next?token=${encodeURIComponent(handle.token)}`,
    );
    return body.done ? null : body.case!;
  }

  submit(handle: SessionHandle, caseId: string, payload: SubmissionPayload): Promise<unknown> {
    return this.request(`/sessions/${handle.session_id}/submit`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token: handle.token, case_id: caseId, payload }),
    });
  }

  pause(handle: SessionHandle): Promise<unknown> {
    return this.request(`/sessions/${handle.session_id}/pause`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token: handle.token }),
    });
  }

  resume(handle: SessionHandle): Promise<unknown> {
    return this.request(`/sessions/${handle.session_id}/resume`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token: handle.token }),
    });
  }
}
