import { describe, expect, it } from "vitest";

import {
  ANNOTATION_VALUES,
  draftToVote,
  emptyDraft,
  voteProblems,
  type VoteDraft,
} from "../src/schema.js";

function draft(overrides: Partial<VoteDraft>): VoteDraft {
  return { ...emptyDraft(), ...overrides };
}

describe("the five-value scale", () => {
  it("has exactly the five values in scale order", () => {
    expect(ANNOTATION_VALUES).toEqual([
      "true",
      "plausible",
      "unknown",
      "implausible",
      "false",
    ]);
  });
});

describe("voteProblems", () => {
  it("requires a selection first", () => {
    expect(voteProblems(emptyDraft())).toEqual([
      "select one of the five values",
    ]);
  });

  it("requires url and snippet for every non-unknown value", () => {
    for (const value of ["true", "plausible", "implausible", "false"] as const) {
      expect(voteProblems(draft({ value }))).toEqual([
        "evidence_url required",
        "snippet required",
      ]);
      expect(
        voteProblems(draft({ value, evidenceUrl: "https://x.org" })),
      ).toEqual(["snippet required"]);
      expect(
        voteProblems(
          draft({ value, evidenceUrl: "https://x.org", snippet: "quoted" }),
        ),
      ).toEqual([]);
    }
  });

  it("requires an explanation for unknown, and nothing else", () => {
    expect(voteProblems(draft({ value: "unknown" }))).toEqual([
      "explanation required for unknown votes",
    ]);
    expect(
      voteProblems(draft({ value: "unknown", explanation: "cannot verify" })),
    ).toEqual([]);
  });

  it("treats whitespace-only entries as missing", () => {
    expect(
      voteProblems(draft({ value: "true", evidenceUrl: "  ", snippet: "\t" })),
    ).toEqual(["evidence_url required", "snippet required"]);
    expect(voteProblems(draft({ value: "unknown", explanation: " " }))).toEqual(
      ["explanation required for unknown votes"],
    );
  });

  it("ignores evidence fields for unknown and explanation for others", () => {
    expect(
      voteProblems(
        draft({ value: "unknown", explanation: "why", evidenceUrl: "" }),
      ),
    ).toEqual([]);
    expect(
      voteProblems(
        draft({
          value: "false",
          evidenceUrl: "https://x.org",
          snippet: "s",
          explanation: "",
        }),
      ),
    ).toEqual([]);
  });
});

describe("draftToVote", () => {
  it("carries evidence for non-unknown values", () => {
    const vote = draftToVote(
      draft({ value: "true", evidenceUrl: "https://x.org", snippet: "s" }),
      "t-1",
      "ann",
    );
    expect(vote).toEqual({
      task_id: "t-1",
      annotator_id: "ann",
      value: "true",
      evidence_url: "https://x.org",
      snippet: "s",
    });
  });

  it("carries the explanation for unknown", () => {
    const vote = draftToVote(
      draft({ value: "unknown", explanation: "no source found" }),
      "t-2",
      "ann",
    );
    expect(vote).toEqual({
      task_id: "t-2",
      annotator_id: "ann",
      value: "unknown",
      explanation: "no source found",
    });
  });

  it("refuses an unsubmittable draft", () => {
    expect(() => draftToVote(draft({ value: "true" }), "t-3", "ann")).toThrow(
      /not submittable/,
    );
  });
});
