/**
 * One annotator's pass through a campaign: fetch a task, build a draft,
 * submit when the rules allow, advance. This is the state machine the
 * DOM layer binds to; tests drive it headlessly.
 */

import { ApiError, type ReviewApiClient } from "./client.js";
import {
  draftToVote,
  emptyDraft,
  voteProblems,
  type AnnotationValue,
  type TaskPayload,
  type VoteDraft,
} from "./schema.js";
import { renderTask, taskView, type TaskScreen } from "./view.js";

export interface SubmitResult {
  submitted: boolean;
  /** Client-side rule violations or the service's rejection reason. */
  problems: string[];
}

export class AnnotationSession {
  readonly campaignId: string;
  readonly annotatorId: string;

  private readonly client: ReviewApiClient;
  private task: TaskPayload | null = null;
  private draft: VoteDraft = emptyDraft();
  private done = 0;
  private total = 0;
  private inlineError: string | null = null;

  constructor(
    client: ReviewApiClient,
    campaignId: string,
    annotatorId: string,
  ) {
    this.client = client;
    this.campaignId = campaignId;
    this.annotatorId = annotatorId;
  }

  /** Load progress counts and the first open task. */
  async start(): Promise<void> {
    const summary = await this.client.summary(this.campaignId);
    this.total = summary.n_tasks;
    this.done = summary.n_done;
    await this.advance();
  }

  private async advance(): Promise<void> {
    this.task = await this.client.nextTask(this.campaignId, this.annotatorId);
    this.draft = emptyDraft();
    this.inlineError = null;
  }

  get currentTask(): TaskPayload | null {
    return this.task;
  }

  get progressDone(): number {
    return this.done;
  }

  get progressTotal(): number {
    return this.total;
  }

  get exhausted(): boolean {
    return this.task === null;
  }

  /** The task form as it should look right now; null when exhausted. */
  get screen(): TaskScreen | null {
    if (this.task === null) {
      return null;
    }
    return renderTask(
      taskView(this.task, this.done, this.total),
      this.draft,
      this.inlineError,
    );
  }

  selectValue(value: AnnotationValue): void {
    this.draft = { ...this.draft, value };
  }

  setEvidenceUrl(text: string): void {
    this.draft = { ...this.draft, evidenceUrl: text };
  }

  setSnippet(text: string): void {
    this.draft = { ...this.draft, snippet: text };
  }

  setExplanation(text: string): void {
    this.draft = { ...this.draft, explanation: text };
  }

  /**
   * Submit the draft if the shared rules allow it.
   *
   * An unsatisfiable draft is refused here, before any network call;
   * a service rejection (the server re-checks everything) is surfaced
   * as the screen's inline error. Success advances to the next task.
   */
  async submit(): Promise<SubmitResult> {
    if (this.task === null) {
      return { submitted: false, problems: ["no open task"] };
    }
    const problems = voteProblems(this.draft);
    if (problems.length > 0) {
      this.inlineError = null;
      return { submitted: false, problems };
    }
    const vote = draftToVote(this.draft, this.task.task_id, this.annotatorId);
    try {
      await this.client.submitVote(this.campaignId, vote);
    } catch (error) {
      if (error instanceof ApiError) {
        this.inlineError = error.message;
        return { submitted: false, problems: [error.message] };
      }
      throw error;
    }
    this.done += 1;
    await this.advance();
    return { submitted: true, problems: [] };
  }
}
