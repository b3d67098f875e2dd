import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { FlowView, SessionFlow } from "../src/flow.js";
import { MockService, defaultBatch } from "./mockService.js";

const BASE = "http://svc.test";

function makeFlow(mock: MockService, studyId = "study-1"): SessionFlow {
  return new SessionFlow(new ApiClient(BASE, mock.fetch), studyId);
}

/** Answer every question with a fixed strategy until the flow leaves "question". */
async function driveToEnd(
  flow: SessionFlow,
  pick: (view: FlowView) => { best: string; worst: string } = (view) => ({
    best: view.words![0]!,
    worst: view.words![view.words!.length - 1]!,
  }),
): Promise<void> {
  let guard = 0;
  while (flow.getState() === "question") {
    if (guard++ > 50) throw new Error("flow did not terminate");
    const choice = pick(flow.view());
    flow.select("best", choice.best);
    flow.select("worst", choice.worst);
    await flow.submit();
  }
}

describe("session flow against the service protocol", () => {
  it("completes a five-tuple batch and ends with a session code", async () => {
    const mock = new MockService();
    const flow = makeFlow(mock);

    expect(await flow.start("ann-1")).toBe("question");
    await driveToEnd(flow);

    expect(flow.getState()).toBe("complete");
    expect(flow.view().sessionCode).toBeTruthy();
    expect(mock.judgments).toHaveLength(5);
    expect(mock.judgments.map((j) => j.tuple_id)).toEqual(
      defaultBatch().map((t) => t.tuple_id),
    );
  });

  it("never posts a judgment with best equal to worst", async () => {
    const mock = new MockService();
    const flow = makeFlow(mock);
    await flow.start("ann-1");

    const word = flow.view().words![0]!;
    flow.select("best", word);
    flow.select("worst", word);
    expect(flow.canSubmit()).toBe(false);
    await flow.submit();
    expect(flow.getState()).toBe("question");
    const posted = mock.requests.filter((r) => r.path.endsWith("/judgments"));
    expect(posted).toHaveLength(0);

    await driveToEnd(flow);
    const bodies = mock.requests
      .filter((r) => r.path.endsWith("/judgments"))
      .map((r) => r.body as { best: string; worst: string });
    expect(bodies).toHaveLength(5);
    for (const body of bodies) {
      expect(body.best).not.toBe(body.worst);
    }
  });

  it("resumes mid-batch under the same annotator id", async () => {
    const mock = new MockService();
    const first = makeFlow(mock);
    await first.start("ann-r");
    for (let i = 0; i < 2; i++) {
      const view = first.view();
      first.select("best", view.words![0]!);
      first.select("worst", view.words![1]!);
      await first.submit();
    }
    expect(first.view().index).toBe(2);

    // new page load: fresh flow, same annotator
    const second = makeFlow(mock);
    await second.start("ann-r");
    expect(second.getState()).toBe("question");
    expect(second.view().index).toBe(2);
    expect(mock.byAnnotator.size).toBe(1);

    await driveToEnd(second);
    expect(second.getState()).toBe("complete");
    expect(mock.judgments).toHaveLength(5);
    expect(new Set(mock.judgments.map((j) => j.tuple_id)).size).toBe(5);
  });

  it("keeps attention-check markers off everything the client sees", async () => {
    const mock = new MockService();
    const flow = makeFlow(mock);
    await flow.start("ann-1");
    await driveToEnd(flow);

    // the check tuple itself was served and answered like any other
    expect(mock.judgments.some((j) => j.tuple_id === "joy-check-000")).toBe(true);

    const seen = JSON.stringify({ req: mock.requests, resp: mock.responses });
    expect(seen).not.toContain("is_attention_check");
    expect(seen).not.toContain("check_key");
    expect(seen).not.toContain("isCheck");
  });

  it("shows a closed page when the study is full, but still resumes", async () => {
    const mock = new MockService(defaultBatch(), 2);
    await makeFlow(mock).start("ann-a");
    await makeFlow(mock).start("ann-b");

    const overflow = makeFlow(mock);
    expect(await overflow.start("ann-c")).toBe("closed");

    const returning = makeFlow(mock);
    expect(await returning.start("ann-a")).toBe("question");
  });

  it("keeps the selection when a submit is rejected", async () => {
    const mock = new MockService();
    const flow = makeFlow(mock);
    await flow.start("ann-1");
    const [best, , , worst] = flow.view().words!;
    flow.select("best", best!);
    flow.select("worst", worst!);

    mock.failNextJudgment = {
      status: 422,
      body: { code: "invalid_request", message: "try again" },
    };
    await flow.submit();

    expect(flow.getState()).toBe("question");
    expect(flow.view().error).toBe("try again");
    expect(flow.view().selection).toEqual({ best, worst });

    await flow.submit();
    expect(flow.view().index).toBe(1);
    expect(flow.view().error).toBeUndefined();
  });

  it("recovers from a network failure via retry", async () => {
    const mock = new MockService();
    const flow = makeFlow(mock);
    await flow.start("ann-1");
    const view = flow.view();
    flow.select("best", view.words![0]!);
    flow.select("worst", view.words![1]!);

    mock.failNextGet = true; // the reload after a successful submit dies
    await flow.submit();
    expect(flow.getState()).toBe("failed");
    expect(flow.view().error).toBeTruthy();

    expect(await flow.retry()).toBe("question");
    expect(flow.view().index).toBe(1);
  });

  it("reloads the current tuple on a stale submit", async () => {
    const mock = new MockService();
    const flow = makeFlow(mock);
    await flow.start("ann-s");
    expect(flow.view().index).toBe(0);

    mock.advanceElsewhere("ann-s");
    const view = flow.view();
    flow.select("best", view.words![0]!);
    flow.select("worst", view.words![1]!);
    await flow.submit();

    expect(flow.getState()).toBe("question");
    expect(flow.view().index).toBe(1);
    expect(flow.view().selection).toEqual({});
    expect(mock.judgments).toHaveLength(0);
  });

  it("presents words exactly in service order", async () => {
    const tuples = defaultBatch();
    const mock = new MockService(tuples);
    const flow = makeFlow(mock);
    await flow.start("ann-1");
    expect(flow.view().words).toEqual(tuples[0]!.words);
  });

  it("ignores selections for words outside the tuple", async () => {
    const mock = new MockService();
    const flow = makeFlow(mock);
    await flow.start("ann-1");
    flow.select("best", "not-a-word");
    expect(flow.view().selection).toEqual({});
    expect(flow.canSubmit()).toBe(false);
  });
});
