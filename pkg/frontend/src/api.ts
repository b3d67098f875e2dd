/**
 * Typed client for the annotation service JSON API.
 * All study/session state lives server-side; this wrapper only shapes
 * requests and turns {code, message, field?} bodies into ApiError.
 */

export interface Demographics {
  age?: number;
  gender?: string;
  education?: string;
  native_speaker?: boolean;
}

export interface SessionInfo {
  session_id: string;
  annotator_id: string;
  assigned_batch: string;
  cursor: number;
  total: number;
  completed: boolean;
  resumed: boolean;
}

export interface TuplePayload {
  done: false;
  tuple_id: string;
  emotion: string;
  words: string[];
  index: number;
  total: number;
}

export type NextResponse = TuplePayload | { done: true };

export interface JudgmentAck {
  accepted: boolean;
  cursor: number;
  completed: boolean;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field?: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiError";
  }

  get code(): string {
    return this.body.code;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private fetchImpl: FetchLike;

  constructor(private baseUrl: string, fetchImpl?: FetchLike) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, payload as ApiErrorBody);
    }
    return payload as T;
  }

  openSession(studyId: string, annotatorId: string, demographics?: Demographics): Promise<SessionInfo> {
    const body: Record<string, unknown> = { annotator_id: annotatorId };
    if (demographics !== undefined) {
      body.demographics = demographics;
    }
    return this.request<SessionInfo>("POST", `/studies/${studyId}/sessions`, body);
  }

  nextTuple(sessionId: string): Promise<NextResponse> {
    return this.request<NextResponse>("GET", `/sessions/${sessionId}/next`);
  }

  submitJudgment(sessionId: string, tupleId: string, best: string, worst: string): Promise<JudgmentAck> {
    return this.request<JudgmentAck>("POST", `/sessions/${sessionId}/judgments`, {
      tuple_id: tupleId,
      best,
      worst,
    });
  }
}
