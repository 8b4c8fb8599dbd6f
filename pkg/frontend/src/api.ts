/** Typed fetch wrapper for the dialogue service. */

import type { SessionCreated, SessionView, TurnResponse } from "./types";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async createSession(): Promise<SessionCreated> {
    return this.request<SessionCreated>("POST", "/sessions");
  }

  async getSession(sessionId: string): Promise<SessionView> {
    return this.request<SessionView>("GET", `/sessions/${sessionId}`);
  }

  async sendMessage(sessionId: string, text: string): Promise<TurnResponse> {
    return this.request<TurnResponse>("POST", `/sessions/${sessionId}/messages`, { text });
  }

  async health(): Promise<{ status: string }> {
    return this.request<{ status: string }>("GET", "/healthz");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(`cannot reach ${this.baseUrl}: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const data = (await response.json()) as { detail?: unknown };
        if (data.detail !== undefined) detail = JSON.stringify(data.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(`${response.status} on ${method} ${path}: ${detail}`, response.status);
    }
    return (await response.json()) as T;
  }
}

/** Resolve the service base URL: ?api= query parameter, else same-host
 * default port. */
export function resolveBaseUrl(href: string): string {
  const url = new URL(href);
  const fromQuery = url.searchParams.get("api");
  if (fromQuery) return fromQuery.replace(/\/+$/, "");
  return `${url.protocol.startsWith("http") ? url.protocol : "http:"}//${url.hostname || "127.0.0.1"}:8077`;
}
