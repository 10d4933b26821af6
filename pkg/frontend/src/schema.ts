/**
 * Wire schema of the review service API, plus the vote validation rules.
 *
 * This is the single place the client encodes what the service will
 * accept: every form-gating and submission decision calls voteProblems
 * from here, so the client can never drift from the service contract.
 * The service applies the same rules on its side and rejects with a
 * {code, message} body; anything this module flags would be rejected.
 */

export const ANNOTATION_VALUES = [
  "true",
  "plausible",
  "unknown",
  "implausible",
  "false",
] as const;

export type AnnotationValue = (typeof ANNOTATION_VALUES)[number];

/** Button labels, in scale order. */
export const VALUE_LABELS: Record<AnnotationValue, string> = {
  true: "True",
  plausible: "Plausible",
  unknown: "Unknown",
  implausible: "Implausible",
  false: "False",
};

export interface TaskCandidate {
  subject_id: string;
  subject_label: string | null;
  relation_id: string;
  predicted_object: string;
  probability: number;
}

export interface TaskPayload {
  task_id: string;
  statement: string;
  status: "open" | "done";
  candidate: TaskCandidate;
}

export interface VotePayload {
  task_id: string;
  annotator_id: string;
  value: AnnotationValue;
  evidence_url?: string;
  snippet?: string;
  explanation?: string;
}

/** Per-relation counts for each of the five values. */
export type Histogram = Record<string, Record<AnnotationValue, number>>;

export interface CampaignSummary {
  campaign_id: string;
  created_at: string;
  n_tasks: number;
  n_open: number;
  n_done: number;
  annotators: string[];
  histogram: Histogram;
}

export interface ExportedAssertion {
  task_id: string;
  subject_id: string;
  subject_label: string | null;
  relation_id: string;
  predicted_object: string;
  probability: number;
  statement: string;
  verdict: AnnotationValue;
  evidence_urls: string[];
}

export interface ExportPayload {
  policy: string;
  assertions: ExportedAssertion[];
  summary: Histogram;
}

export interface AgreementPayload {
  annotators: [string, string];
  exact: number;
  binary: number;
  n_tasks: number;
}

/** Service error body; HTTP status mirrors the code. */
export interface ApiErrorBody {
  code: string;
  message: string;
}

/** What the annotator has entered so far; value null until selected. */
export interface VoteDraft {
  value: AnnotationValue | null;
  evidenceUrl: string;
  snippet: string;
  explanation: string;
}

export function emptyDraft(): VoteDraft {
  return { value: null, evidenceUrl: "", snippet: "", explanation: "" };
}

function blank(text: string): boolean {
  return text.trim() === "";
}

/**
 * Violations of the evidence/explanation rules; empty means submittable.
 *
 * Any verdict other than unknown needs an evidence URL plus a supporting
 * text snippet; an unknown verdict needs an explanation instead. A draft
 * with no value selected is never submittable.
 */
export function voteProblems(draft: VoteDraft): string[] {
  if (draft.value === null) {
    return ["select one of the five values"];
  }
  const problems: string[] = [];
  if (draft.value === "unknown") {
    if (blank(draft.explanation)) {
      problems.push("explanation required for unknown votes");
    }
  } else {
    if (blank(draft.evidenceUrl)) {
      problems.push("evidence_url required");
    }
    if (blank(draft.snippet)) {
      problems.push("snippet required");
    }
  }
  return problems;
}

/** The vote payload a valid draft submits; throws on an invalid draft. */
export function draftToVote(
  draft: VoteDraft,
  taskId: string,
  annotatorId: string,
): VotePayload {
  const problems = voteProblems(draft);
  if (problems.length > 0 || draft.value === null) {
    throw new Error(`draft is not submittable: ${problems.join("; ")}`);
  }
  const vote: VotePayload = {
    task_id: taskId,
    annotator_id: annotatorId,
    value: draft.value,
  };
  if (draft.value === "unknown") {
    vote.explanation = draft.explanation;
  } else {
    vote.evidence_url = draft.evidenceUrl;
    vote.snippet = draft.snippet;
  }
  return vote;
}
