import { describe, expect, it } from "vitest";

import { ApiError, ReviewApiClient } from "../src/client.js";
import { AnnotationSession } from "../src/session.js";
import type { TaskPayload, VotePayload } from "../src/schema.js";

function makeTask(i: number): TaskPayload {
  return {
    task_id: `t-${i}`,
    statement: `The native language of Person ${i} is French .`,
    status: "open",
    candidate: {
      subject_id: `Q${100 + i}`,
      subject_label: `Person ${i}`,
      relation_id: "P103",
      predicted_object: "French",
      probability: 0.9,
    },
  };
}

/**
 * In-memory stand-in for the service: serves tasks in order, counts
 * submissions, and can be told to reject. The session never notices
 * the difference because it only calls client methods.
 */
class StubClient {
  tasks: TaskPayload[];
  votes: VotePayload[] = [];
  submitCalls = 0;
  rejectWith: ApiError | null = null;

  constructor(tasks: TaskPayload[]) {
    this.tasks = tasks;
  }

  async summary(_campaignId: string) {
    return {
      campaign_id: "c-1",
      created_at: "",
      n_tasks: this.tasks.length,
      n_open: this.tasks.length - this.votes.length,
      n_done: this.votes.length,
      annotators: [],
      histogram: {},
    };
  }

  async nextTask(_campaignId: string, _annotator: string) {
    const voted = new Set(this.votes.map((v) => v.task_id));
    return this.tasks.find((t) => !voted.has(t.task_id)) ?? null;
  }

  async submitVote(_campaignId: string, vote: VotePayload) {
    this.submitCalls += 1;
    if (this.rejectWith !== null) {
      throw this.rejectWith;
    }
    this.votes.push(vote);
  }
}

function makeSession(stub: StubClient): AnnotationSession {
  return new AnnotationSession(
    stub as unknown as ReviewApiClient,
    "c-1",
    "ann",
  );
}

describe("AnnotationSession", () => {
  it("loads the first task with progress counts", async () => {
    const stub = new StubClient([makeTask(1), makeTask(2)]);
    const session = makeSession(stub);
    await session.start();
    expect(session.currentTask?.task_id).toBe("t-1");
    expect(session.screen?.progress).toBe("0 / 2");
  });

  it("blocks an evidence-free submit before any network call", async () => {
    const stub = new StubClient([makeTask(1)]);
    const session = makeSession(stub);
    await session.start();

    session.selectValue("true");
    expect(session.screen?.submitEnabled).toBe(false);
    const result = await session.submit();
    expect(result.submitted).toBe(false);
    expect(result.problems).toEqual([
      "evidence_url required",
      "snippet required",
    ]);
    expect(stub.submitCalls).toBe(0);
  });

  it("submits a complete draft and advances with progress", async () => {
    const stub = new StubClient([makeTask(1), makeTask(2)]);
    const session = makeSession(stub);
    await session.start();

    session.selectValue("true");
    session.setEvidenceUrl("https://example.org/1");
    session.setSnippet("a supporting quote");
    expect(session.screen?.submitEnabled).toBe(true);

    const result = await session.submit();
    expect(result.submitted).toBe(true);
    expect(stub.votes).toEqual([
      {
        task_id: "t-1",
        annotator_id: "ann",
        value: "true",
        evidence_url: "https://example.org/1",
        snippet: "a supporting quote",
      },
    ]);
    expect(session.currentTask?.task_id).toBe("t-2");
    expect(session.screen?.progress).toBe("1 / 2");
    // the fresh task starts from a clean draft
    expect(session.screen?.evidenceUrl.value).toBe("");
    expect(session.screen?.submitEnabled).toBe(false);
  });

  it("surfaces a service rejection inline and keeps the task", async () => {
    const stub = new StubClient([makeTask(1)]);
    const session = makeSession(stub);
    await session.start();

    stub.rejectWith = new ApiError("conflict", "already voted", 409);
    session.selectValue("false");
    session.setEvidenceUrl("https://example.org/x");
    session.setSnippet("contradicting quote");

    const result = await session.submit();
    expect(result.submitted).toBe(false);
    expect(result.problems).toEqual(["already voted"]);
    expect(session.screen?.inlineError).toBe("already voted");
    expect(session.currentTask?.task_id).toBe("t-1");
  });

  it("reports exhaustion when every task is voted", async () => {
    const stub = new StubClient([makeTask(1)]);
    const session = makeSession(stub);
    await session.start();

    session.selectValue("unknown");
    session.setExplanation("cannot verify");
    await session.submit();

    expect(session.exhausted).toBe(true);
    expect(session.screen).toBeNull();
    const result = await session.submit();
    expect(result).toEqual({ submitted: false, problems: ["no open task"] });
  });
});
