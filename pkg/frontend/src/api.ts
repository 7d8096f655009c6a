/** Typed fetch client for the session service. */

import type {
  AnswerPayload,
  QueryPayload,
  Recommendation,
  SpecSummary,
  Verdict,
} from './types';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SessionApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok && response.status !== 202) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async listSpecs(): Promise<SpecSummary[]> {
    const body = await this.request<{ specs: SpecSummary[] }>('/specs');
    return body.specs;
  }

  async createSession(specId: string, k: number, T: number): Promise<string> {
    const body = await this.request<{ sessionId: string }>('/sessions', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ specId, k, T }),
    });
    return body.sessionId;
  }

  /** Null while the server is still solving (HTTP 202). */
  async getQuery(sessionId: string): Promise<QueryPayload | null> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/query`);
    if (response.status === 202) return null;
    if (!response.ok) {
      throw new ApiError(response.status, (await response.text()) || response.statusText);
    }
    return (await response.json()) as QueryPayload;
  }

  async submitAnswer(sessionId: string, verdict: Verdict): Promise<AnswerPayload> {
    return this.request<AnswerPayload>(`/sessions/${sessionId}/answer`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ verdict }),
    });
  }

  async finish(sessionId: string): Promise<Recommendation> {
    return this.request<Recommendation>(`/sessions/${sessionId}/finish`, {
      method: 'POST',
    });
  }
}
