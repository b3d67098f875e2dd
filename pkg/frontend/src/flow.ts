/**
 * Session flow state machine: open session, loop tuples, submit, complete.
 *
 * The flow never sees attention-check markers (the wire hides them) and a
 * judgment can only leave through submit() when best and worst are set and
 * differ, so every POST satisfies the service invariant by construction.
 */

import { ApiClient, ApiError, Demographics, SessionInfo, TuplePayload } from "./api.js";

export type FlowState =
  | "idle"
  | "opening"
  | "loading"
  | "question"
  | "submitting"
  | "complete"
  | "closed"
  | "failed";

const TRANSITIONS: Record<FlowState, FlowState[]> = {
  idle: ["opening"],
  opening: ["loading", "closed", "failed"],
  loading: ["question", "complete", "failed"],
  question: ["submitting"],
  submitting: ["loading", "question", "failed"],
  complete: [],
  closed: [],
  failed: ["opening", "loading"],
};

export interface Selection {
  best?: string;
  worst?: string;
}

export interface FlowView {
  state: FlowState;
  emotion?: string;
  words?: string[];
  selection: Selection;
  index?: number;
  total?: number;
  error?: string;
  sessionCode?: string;
}

export class SessionFlow {
  private state: FlowState = "idle";
  private session?: SessionInfo;
  private tuple?: TuplePayload;
  private selection: Selection = {};
  private lastError?: string;

  constructor(private client: ApiClient, private studyId: string) {}

  getState(): FlowState {
    return this.state;
  }

  view(): FlowView {
    return {
      state: this.state,
      emotion: this.tuple?.emotion,
      words: this.tuple ? [...this.tuple.words] : undefined,
      selection: { ...this.selection },
      index: this.tuple?.index,
      total: this.tuple?.total ?? this.session?.total,
      error: this.lastError,
      sessionCode: this.state === "complete" ? this.session?.session_id : undefined,
    };
  }

  private to(target: FlowState): FlowState {
    if (!TRANSITIONS[this.state].includes(target)) {
      throw new Error(`illegal transition ${this.state} -> ${target}`);
    }
    this.state = target;
    return this.state;
  }

  /** Open (or resume) a session and load the first pending tuple. */
  async start(annotatorId: string, demographics?: Demographics): Promise<FlowState> {
    this.to("opening");
    this.lastError = undefined;
    try {
      this.session = await this.client.openSession(this.studyId, annotatorId, demographics);
    } catch (err) {
      if (err instanceof ApiError && err.code === "study_full") {
        return this.to("closed");
      }
      this.lastError = err instanceof Error ? err.message : String(err);
      return this.to("failed");
    }
    return this.advance();
  }

  private async advance(): Promise<FlowState> {
    if (!this.session) {
      throw new Error("advance() before start()");
    }
    this.to("loading");
    this.selection = {};
    this.tuple = undefined;
    try {
      const next = await this.client.nextTuple(this.session.session_id);
      if (next.done) {
        return this.to("complete");
      }
      this.tuple = next;
      return this.to("question");
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      return this.to("failed");
    }
  }

  /** Record a best/worst pick; ignored unless a question is on screen. */
  select(kind: "best" | "worst", word: string): void {
    if (this.state !== "question" || !this.tuple || !this.tuple.words.includes(word)) {
      return;
    }
    this.selection[kind] = word;
  }

  canSubmit(): boolean {
    const { best, worst } = this.selection;
    return this.state === "question" && !!best && !!worst && best !== worst;
  }

  /**
   * Submit the current selection. On validation or network errors the
   * question stays up with the selection intact; a stale-cursor conflict
   * (another tab advanced) reloads the server's current tuple instead.
   */
  async submit(): Promise<FlowState> {
    if (!this.canSubmit() || !this.session || !this.tuple) {
      return this.state;
    }
    const { best, worst } = this.selection;
    const tupleId = this.tuple.tuple_id;
    this.to("submitting");
    this.lastError = undefined;
    try {
      await this.client.submitJudgment(this.session.session_id, tupleId, best!, worst!);
    } catch (err) {
      if (err instanceof ApiError && err.code === "stale_tuple") {
        return this.advance();
      }
      this.lastError = err instanceof Error ? err.message : String(err);
      return this.to("question");
    }
    return this.advance();
  }

  /** Recover from a failed load by retrying the pending fetch. */
  async retry(): Promise<FlowState> {
    if (this.state !== "failed") {
      return this.state;
    }
    if (this.session) {
      return this.advance();
    }
    return this.state;
  }
}
