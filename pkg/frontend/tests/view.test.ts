import { describe, expect, it } from "vitest";

import { emptyDraft, type CampaignSummary, type TaskPayload } from "../src/schema.js";
import {
  campaignDashboard,
  renderTask,
  taskView,
  wholePercentages,
} from "../src/view.js";

const TASK: TaskPayload = {
  task_id: "t-1",
  statement: "The native language of Ann Smith is French .",
  status: "open",
  candidate: {
    subject_id: "Q101",
    subject_label: "Ann Smith",
    relation_id: "P103",
    predicted_object: "French",
    probability: 0.97,
  },
};

function summaryWith(
  histogram: CampaignSummary["histogram"],
  nTasks = 50,
  nDone = 50,
): CampaignSummary {
  return {
    campaign_id: "c-1",
    created_at: "2026-01-01T00:00:00+00:00",
    n_tasks: nTasks,
    n_open: nTasks - nDone,
    n_done: nDone,
    annotators: ["ann"],
    histogram,
  };
}

describe("renderTask", () => {
  it("offers exactly the five labeled values", () => {
    const screen = renderTask(taskView(TASK, 3, 10), emptyDraft());
    expect(screen.actions.map((a) => a.label)).toEqual([
      "True",
      "Plausible",
      "Unknown",
      "Implausible",
      "False",
    ]);
    expect(screen.actions.every((a) => !a.selected)).toBe(true);
  });

  it("renders the statement verbatim and the progress", () => {
    const screen = renderTask(taskView(TASK, 3, 10), emptyDraft());
    expect(screen.statement).toBe(TASK.statement);
    expect(screen.relationName).toBe("P103");
    expect(screen.progress).toBe("3 / 10");
  });

  it("pre-fills a search link for the statement", () => {
    const screen = renderTask(taskView(TASK, 0, 1), emptyDraft());
    expect(screen.searchLink).toBe(
      "https://duckduckgo.com/?q=" + encodeURIComponent(TASK.statement),
    );
  });

  it("keeps submit disabled until the draft satisfies the rules", () => {
    const view = taskView(TASK, 0, 10);
    expect(renderTask(view, emptyDraft()).submitEnabled).toBe(false);

    const selected = { ...emptyDraft(), value: "true" as const };
    expect(renderTask(view, selected).submitEnabled).toBe(false);

    const withUrl = { ...selected, evidenceUrl: "https://x.org" };
    expect(renderTask(view, withUrl).submitEnabled).toBe(false);

    const complete = { ...withUrl, snippet: "supporting quote" };
    expect(renderTask(view, complete).submitEnabled).toBe(true);
  });

  it("gates unknown on the explanation instead of evidence", () => {
    const view = taskView(TASK, 0, 10);
    const unknown = { ...emptyDraft(), value: "unknown" as const };
    const screen = renderTask(view, unknown);
    expect(screen.submitEnabled).toBe(false);
    expect(screen.explanation.required).toBe(true);
    expect(screen.evidenceUrl.required).toBe(false);

    const explained = { ...unknown, explanation: "no source found" };
    expect(renderTask(view, explained).submitEnabled).toBe(true);
  });

  it("surfaces a service rejection inline", () => {
    const screen = renderTask(
      taskView(TASK, 0, 10),
      emptyDraft(),
      "already voted",
    );
    expect(screen.inlineError).toBe("already voted");
  });
});

describe("wholePercentages", () => {
  it("sums to exactly 100 for a nonzero total", () => {
    for (const counts of [
      [24, 17, 3, 4, 2],
      [1, 1, 1, 0, 0],
      [7, 11, 13, 17, 19],
      [1, 0, 0, 0, 0],
    ]) {
      const percents = wholePercentages(counts);
      expect(percents.reduce((a, b) => a + b, 0)).toBe(100);
    }
  });

  it("is all zeros for an empty histogram", () => {
    expect(wholePercentages([0, 0, 0, 0, 0])).toEqual([0, 0, 0, 0, 0]);
  });
});

describe("campaignDashboard", () => {
  it("reproduces the reference five-value histogram", () => {
    // 50 judged facts: 24 true, 17 plausible, 3 unknown, 4 implausible, 2 false
    const dashboard = campaignDashboard(
      summaryWith({
        nativeLanguage: {
          true: 24,
          plausible: 17,
          unknown: 3,
          implausible: 4,
          false: 2,
        },
      }),
    );
    expect(dashboard.rows).toHaveLength(1);
    const row = dashboard.rows[0];
    expect(row.relation).toBe("nativeLanguage");
    expect(row.total).toBe(50);
    expect(row.cells.map((c) => c.percent)).toEqual([48, 34, 6, 8, 4]);
    expect(row.cells.map((c) => c.label)).toEqual([
      "True",
      "Plausible",
      "Unknown",
      "Implausible",
      "False",
    ]);
  });

  it("offers strict and plausible export buttons", () => {
    const dashboard = campaignDashboard(summaryWith({}));
    expect(dashboard.exportButtons.map((b) => b.policy)).toEqual([
      "strict",
      "plausible",
    ]);
  });

  it("shows a zero state for a campaign without votes", () => {
    const empty = campaignDashboard(
      summaryWith(
        {
          P103: { true: 0, plausible: 0, unknown: 0, implausible: 0, false: 0 },
        },
        10,
        0,
      ),
    );
    expect(empty.zeroState).toBe(true);
    expect(empty.progress).toBe("0 / 10");
  });

  it("sorts relations and keeps per-relation sums at 100", () => {
    const dashboard = campaignDashboard(
      summaryWith({
        P19: { true: 5, plausible: 2, unknown: 1, implausible: 1, false: 1 },
        P103: { true: 1, plausible: 1, unknown: 1, implausible: 0, false: 0 },
      }),
    );
    expect(dashboard.rows.map((r) => r.relation)).toEqual(["P103", "P19"]);
    for (const row of dashboard.rows) {
      const sum = row.cells.reduce((a, c) => a + c.percent, 0);
      expect(sum).toBe(100);
    }
  });
});
