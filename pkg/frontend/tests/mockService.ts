/**
 * In-memory stand-in for the annotation service, faithful to its wire
 * protocol: same routes, same response shapes, same {code, message, field?}
 * error bodies. It knows which tuple is the attention check but, like the
 * real service, never serializes that knowledge.
 *
 * Every request body and response payload is recorded so tests can prove
 * information-hiding properties over everything the client saw.
 */

import { ApiErrorBody, FetchLike } from "../src/api.js";

export interface MockTuple {
  tuple_id: string;
  emotion: string;
  words: string[];
  // server-private; must never appear on the wire
  isCheck: boolean;
  checkKey?: { best: string; worst: string };
}

interface MockSession {
  session_id: string;
  annotator_id: string;
  cursor: number;
}

export interface RecordedRequest {
  method: string;
  path: string;
  body?: unknown;
}

export interface RecordedJudgment {
  session_id: string;
  tuple_id: string;
  best: string;
  worst: string;
}

export function defaultBatch(): MockTuple[] {
  const real = (id: string, words: string[]): MockTuple => ({
    tuple_id: id,
    emotion: "joy",
    words,
    isCheck: false,
  });
  return [
    real("joy-t-000", ["coru", "bela", "gilt", "dimo"]),
    real("joy-t-001", ["fane", "dimo", "bela", "coru"]),
    {
      tuple_id: "joy-check-000",
      emotion: "joy",
      words: ["glee", "coru", "fane", "grief"],
      isCheck: true,
      checkKey: { best: "glee", worst: "grief" },
    },
    real("joy-t-002", ["gilt", "fane", "coru", "bela"]),
    real("joy-t-003", ["dimo", "gilt", "fane", "bela"]),
  ];
}

export class MockService {
  readonly tuples: MockTuple[];
  readonly capacity: number;
  readonly sessions = new Map<string, MockSession>();
  readonly byAnnotator = new Map<string, MockSession>();
  readonly requests: RecordedRequest[] = [];
  readonly responses: unknown[] = [];
  readonly judgments: RecordedJudgment[] = [];
  failNextJudgment?: { status: number; body: ApiErrorBody };
  failNextGet = false;
  private counter = 0;

  constructor(tuples: MockTuple[] = defaultBatch(), capacity = 3) {
    this.tuples = tuples;
    this.capacity = capacity;
  }

  /** Bump a session's cursor as if another tab submitted a judgment. */
  advanceElsewhere(annotatorId: string): void {
    const session = this.byAnnotator.get(annotatorId);
    if (!session) throw new Error(`no session for ${annotatorId}`);
    session.cursor += 1;
  }

  fetch: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const path = input.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? (JSON.parse(String(init.body)) as unknown) : undefined;
    this.requests.push({ method, path, body });

    if (this.failNextGet && method === "GET") {
      this.failNextGet = false;
      throw new TypeError("network down");
    }

    let match = path.match(/^\/studies\/([^/]+)\/sessions$/);
    if (match && method === "POST") {
      return this.openSession(body as { annotator_id?: unknown });
    }
    match = path.match(/^\/sessions\/([^/]+)\/next$/);
    if (match && method === "GET") {
      return this.nextTuple(match[1]!);
    }
    match = path.match(/^\/sessions\/([^/]+)\/judgments$/);
    if (match && method === "POST") {
      return this.submitJudgment(match[1]!, body as Partial<RecordedJudgment>);
    }
    return this.error(404, { code: "not_found", message: `no route for ${method} ${path}` });
  };

  private json(status: number, payload: unknown): Response {
    this.responses.push(payload);
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  }

  private error(status: number, body: ApiErrorBody): Response {
    return this.json(status, body);
  }

  private sessionPayload(session: MockSession, resumed: boolean): unknown {
    return {
      session_id: session.session_id,
      annotator_id: session.annotator_id,
      assigned_batch: "joy-batch-000",
      cursor: session.cursor,
      total: this.tuples.length,
      completed: session.cursor >= this.tuples.length,
      resumed,
    };
  }

  private openSession(body: { annotator_id?: unknown }): Response {
    const annotatorId = body?.annotator_id;
    if (typeof annotatorId !== "string" || !annotatorId) {
      return this.error(422, {
        code: "invalid_request",
        message: "annotator_id must be a non-empty string",
        field: "annotator_id",
      });
    }
    const existing = this.byAnnotator.get(annotatorId);
    if (existing) {
      return this.json(200, this.sessionPayload(existing, true));
    }
    if (this.byAnnotator.size >= this.capacity) {
      return this.error(409, { code: "study_full", message: "all annotation slots are taken" });
    }
    const session: MockSession = {
      session_id: `sess-${this.counter++}`,
      annotator_id: annotatorId,
      cursor: 0,
    };
    this.sessions.set(session.session_id, session);
    this.byAnnotator.set(annotatorId, session);
    return this.json(200, this.sessionPayload(session, false));
  }

  private nextTuple(sessionId: string): Response {
    const session = this.sessions.get(sessionId);
    if (!session) {
      return this.error(404, { code: "not_found", message: "unknown session" });
    }
    if (session.cursor >= this.tuples.length) {
      return this.json(200, { done: true });
    }
    const tuple = this.tuples[session.cursor]!;
    return this.json(200, {
      done: false,
      tuple_id: tuple.tuple_id,
      emotion: tuple.emotion,
      words: [...tuple.words],
      index: session.cursor,
      total: this.tuples.length,
    });
  }

  private submitJudgment(sessionId: string, body: Partial<RecordedJudgment>): Response {
    const session = this.sessions.get(sessionId);
    if (!session) {
      return this.error(404, { code: "not_found", message: "unknown session" });
    }
    if (this.failNextJudgment) {
      const planned = this.failNextJudgment;
      this.failNextJudgment = undefined;
      return this.error(planned.status, planned.body);
    }
    if (session.cursor >= this.tuples.length) {
      return this.error(409, { code: "session_complete", message: "session already complete" });
    }
    const expected = this.tuples[session.cursor]!;
    if (body.tuple_id !== expected.tuple_id) {
      return this.error(409, {
        code: "stale_tuple",
        message: `expected a judgment for ${expected.tuple_id}`,
      });
    }
    const { best, worst } = body;
    if (typeof best !== "string" || typeof worst !== "string") {
      return this.error(422, { code: "invalid_request", message: "best and worst are required" });
    }
    if (best === worst) {
      return this.error(422, {
        code: "equal_choice",
        message: "best and worst must differ",
        field: "worst",
      });
    }
    for (const [field, word] of [["best", best], ["worst", worst]] as const) {
      if (!expected.words.includes(word)) {
        return this.error(422, {
          code: "word_not_in_tuple",
          message: `'${word}' is not in the current tuple`,
          field,
        });
      }
    }
    this.judgments.push({ session_id: sessionId, tuple_id: expected.tuple_id, best, worst });
    session.cursor += 1;
    return this.json(200, {
      accepted: true,
      cursor: session.cursor,
      completed: session.cursor >= this.tuples.length,
    });
  }
}
