// Thin typed client over the service's HTTP+JSON endpoints. The fetch
// implementation is injectable so tests can run against an in-memory server.

import type {
  AdaptedUiResponse,
  AnswerAck,
  Clip,
  Domain,
  HealthResponse,
  JobCreated,
  JobRecord,
  NextQueryResponse,
  PreferenceChoice,
  QuestionnairePayload,
  QuestionnaireScore,
  SessionCreated,
  SessionProgress,
  Technique,
  UserRecord,
} from "./types.js";

export interface HttpResponse {
  status: number;
  text(): Promise<string>;
}

export interface RequestOptions {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}

export type FetchLike = (url: string, init?: RequestOptions) => Promise<HttpResponse>;

/** Error envelope every failing endpoint returns: JSON {code, message}. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface TrainOptions {
  beta?: number;
  steps?: number;
  domain?: Domain;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? (globalThis.fetch as unknown as FetchLike);
  }

  private async requestText(method: string, path: string, body?: unknown): Promise<string> {
    const init: RequestOptions = { method, headers: { accept: "application/json" } };
    if (body !== undefined) {
      init.headers!["content-type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchImpl(this.baseUrl + path, init);
    const text = await res.text();
    if (res.status >= 400) {
      let code = "http_error";
      let message = text || `request failed with status ${res.status}`;
      try {
        const parsed = JSON.parse(text) as { code?: string; message?: string };
        if (parsed.code) code = parsed.code;
        if (parsed.message) message = parsed.message;
      } catch {
        // not a JSON envelope; keep the raw body as the message
      }
      throw new ApiError(res.status, code, message);
    }
    return text;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const text = await this.requestText(method, path, body);
    return JSON.parse(text) as T;
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/health");
  }

  getClip(clipId: string): Promise<Clip> {
    return this.request("GET", `/clips/${encodeURIComponent(clipId)}`);
  }

  createUser(userId: string, demographic?: Record<string, string>): Promise<UserRecord> {
    return this.request("POST", "/users", { user_id: userId, demographic });
  }

  createSession(userId: string, domain: Domain): Promise<SessionCreated> {
    return this.request(
      "POST",
      `/users/${encodeURIComponent(userId)}/sessions?domain=${encodeURIComponent(domain)}`
    );
  }

  nextQuery(sessionId: string): Promise<NextQueryResponse> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/next`);
  }

  postAnswer(sessionId: string, queryId: string, label: PreferenceChoice): Promise<AnswerAck> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/answers`, {
      query_id: queryId,
      label,
    });
  }

  progress(sessionId: string): Promise<SessionProgress> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/progress`);
  }

  trainReward(userId: string, options: TrainOptions = {}): Promise<JobCreated> {
    return this.request("POST", `/users/${encodeURIComponent(userId)}/train/reward`, options);
  }

  trainAgent(userId: string, options: TrainOptions = {}): Promise<JobCreated> {
    return this.request("POST", `/users/${encodeURIComponent(userId)}/train/agent`, options);
  }

  getJob(jobId: string): Promise<JobRecord> {
    return this.request("GET", `/jobs/${encodeURIComponent(jobId)}`);
  }

  adaptedUi(
    userId: string,
    domain: Domain,
    technique: Technique,
    stateSlug: string
  ): Promise<AdaptedUiResponse> {
    const params = [
      `domain=${encodeURIComponent(domain)}`,
      `technique=${encodeURIComponent(technique)}`,
      `state=${encodeURIComponent(stateSlug)}`,
    ].join("&");
    return this.request("GET", `/users/${encodeURIComponent(userId)}/ui?${params}`);
  }

  postQuestionnaire(
    userId: string,
    period: number,
    payload: QuestionnairePayload
  ): Promise<QuestionnaireScore> {
    return this.request("POST", `/users/${encodeURIComponent(userId)}/questionnaires/${period}`, payload);
  }

  exportCsv(): Promise<string> {
    return this.requestText("GET", "/export/results.csv");
  }
}
