/**
 * Minimal HTTP client for the review service.
 *
 * Every route the service exposes has one method here; the frontend
 * reaches the service exclusively through this module. Non-2xx
 * responses raise ApiError carrying the service's {code, message} body.
 */

import type {
  AgreementPayload,
  ApiErrorBody,
  CampaignSummary,
  ExportPayload,
  TaskPayload,
  VotePayload,
} from "./schema.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ReviewApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = fetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json; charset=utf-8" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const payload = (await response.json()) as T | ApiErrorBody;
    if (!response.ok) {
      const error = payload as ApiErrorBody;
      throw new ApiError(
        error.code ?? "error",
        error.message ?? `request failed with status ${response.status}`,
        response.status,
      );
    }
    return payload as T;
  }

  async health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  async createCampaign(
    tasks: TaskPayload[],
  ): Promise<{ campaign_id: string; n_tasks: number }> {
    return this.request("POST", "/campaigns", { tasks });
  }

  async nextTask(
    campaignId: string,
    annotator: string,
  ): Promise<TaskPayload | null> {
    const body = await this.request<{ task: TaskPayload | null }>(
      "GET",
      `/campaigns/${campaignId}/next?annotator=${encodeURIComponent(annotator)}`,
    );
    return body.task;
  }

  async submitVote(campaignId: string, vote: VotePayload): Promise<void> {
    await this.request("POST", `/campaigns/${campaignId}/votes`, vote);
  }

  async agreement(
    campaignId: string,
    a?: string,
    b?: string,
  ): Promise<AgreementPayload> {
    const query =
      a && b
        ? `?a=${encodeURIComponent(a)}&b=${encodeURIComponent(b)}`
        : "";
    return this.request("GET", `/campaigns/${campaignId}/agreement${query}`);
  }

  async exportAccepted(
    campaignId: string,
    policy: "strict" | "plausible",
  ): Promise<ExportPayload> {
    return this.request(
      "GET",
      `/campaigns/${campaignId}/export?policy=${policy}`,
    );
  }

  async summary(campaignId: string): Promise<CampaignSummary> {
    return this.request("GET", `/campaigns/${campaignId}/summary`);
  }
}
