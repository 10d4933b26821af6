/**
 * Pure view models for the two screens: the task form and the campaign
 * dashboard. No DOM and no network here; main.ts projects these onto
 * elements, tests assert on them directly.
 */

import {
  ANNOTATION_VALUES,
  VALUE_LABELS,
  voteProblems,
  type AnnotationValue,
  type CampaignSummary,
  type TaskPayload,
  type VoteDraft,
} from "./schema.js";

/** Search link prefix; a plain URL, no provider library involved. */
export const SEARCH_BASE = "https://duckduckgo.com/?q=";

export interface TaskView {
  taskId: string;
  statement: string;
  relationName: string;
  done: number;
  total: number;
}

export function taskView(
  task: TaskPayload,
  done: number,
  total: number,
): TaskView {
  // statement passes through verbatim: rendering never re-verbalizes
  return {
    taskId: task.task_id,
    statement: task.statement,
    relationName: task.candidate.relation_id,
    done,
    total,
  };
}

export interface ActionButton {
  value: AnnotationValue;
  label: string;
  selected: boolean;
}

export interface FormField {
  value: string;
  required: boolean;
}

export interface TaskScreen {
  taskId: string;
  statement: string;
  relationName: string;
  progress: string;
  searchLink: string;
  actions: ActionButton[];
  evidenceUrl: FormField;
  snippet: FormField;
  explanation: FormField;
  problems: string[];
  submitEnabled: boolean;
  inlineError: string | null;
}

/**
 * The task form in one deterministic pass.
 *
 * Exactly the five scale values are offered; the submit control is
 * enabled only when the draft already satisfies the vote rules, so a
 * payload the service would reject is never even sendable. A service
 * rejection from the previous attempt surfaces as inlineError.
 */
export function renderTask(
  view: TaskView,
  draft: VoteDraft,
  inlineError: string | null = null,
): TaskScreen {
  const problems = voteProblems(draft);
  const needsEvidence = draft.value !== null && draft.value !== "unknown";
  return {
    taskId: view.taskId,
    statement: view.statement,
    relationName: view.relationName,
    progress: `${view.done} / ${view.total}`,
    searchLink: SEARCH_BASE + encodeURIComponent(view.statement),
    actions: ANNOTATION_VALUES.map((value) => ({
      value,
      label: VALUE_LABELS[value],
      selected: draft.value === value,
    })),
    evidenceUrl: { value: draft.evidenceUrl, required: needsEvidence },
    snippet: { value: draft.snippet, required: needsEvidence },
    explanation: {
      value: draft.explanation,
      required: draft.value === "unknown",
    },
    problems,
    submitEnabled: problems.length === 0,
    inlineError,
  };
}

export interface HistogramCell {
  value: AnnotationValue;
  label: string;
  count: number;
  percent: number;
}

export interface DashboardRow {
  relation: string;
  total: number;
  cells: HistogramCell[];
}

export interface ExportButton {
  policy: "strict" | "plausible";
  label: string;
}

export interface Dashboard {
  campaignId: string;
  progress: string;
  zeroState: boolean;
  rows: DashboardRow[];
  exportButtons: ExportButton[];
}

/**
 * Integer percentages that sum to exactly 100 for a nonzero total.
 *
 * Largest-remainder rounding: floor everything, then hand the leftover
 * points to the largest fractional parts, ties to the earlier cell.
 */
export function wholePercentages(counts: number[]): number[] {
  const total = counts.reduce((a, b) => a + b, 0);
  if (total === 0) {
    return counts.map(() => 0);
  }
  const exact = counts.map((c) => (c * 100) / total);
  const floors = exact.map(Math.floor);
  let leftover = 100 - floors.reduce((a, b) => a + b, 0);
  const order = exact
    .map((value, i) => ({ i, fraction: value - floors[i] }))
    .sort((a, b) => b.fraction - a.fraction || a.i - b.i);
  for (const { i } of order) {
    if (leftover === 0) {
      break;
    }
    floors[i] += 1;
    leftover -= 1;
  }
  return floors;
}

/** The dashboard: one five-cell histogram row per relation, plus exports. */
export function campaignDashboard(summary: CampaignSummary): Dashboard {
  const relations = Object.keys(summary.histogram).sort();
  const rows = relations.map((relation) => {
    const byValue = summary.histogram[relation];
    const counts = ANNOTATION_VALUES.map((value) => byValue[value] ?? 0);
    const percents = wholePercentages(counts);
    return {
      relation,
      total: counts.reduce((a, b) => a + b, 0),
      cells: ANNOTATION_VALUES.map((value, i) => ({
        value,
        label: VALUE_LABELS[value],
        count: counts[i],
        percent: percents[i],
      })),
    };
  });
  return {
    campaignId: summary.campaign_id,
    progress: `${summary.n_done} / ${summary.n_tasks}`,
    zeroState: rows.every((row) => row.total === 0),
    rows,
    exportButtons: [
      { policy: "strict", label: "Export accepted (strict)" },
      { policy: "plausible", label: "Export accepted (plausible)" },
    ],
  };
}
