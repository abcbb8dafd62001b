import type { Advice, NetworkInfo, SessionCreated, TripEvent } from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

/** Thin typed client over the advisory service. A custom fetch can be
 * injected, which is how the offline fixture tests run without a server. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as Record<string, unknown>;
    if (response.status >= 400) {
      const detail = typeof payload.detail === "string" ? payload.detail : JSON.stringify(payload);
      throw new ApiRequestError(response.status, detail);
    }
    return payload as T;
  }

  listNetworks(): Promise<NetworkInfo[]> {
    return this.request<NetworkInfo[]>("GET", "/networks");
  }

  createSession(networkId: string, budget: number | string): Promise<SessionCreated> {
    return this.request<SessionCreated>("POST", "/sessions", {
      network_id: networkId,
      budget,
    });
  }

  postEvent(sessionId: string, event: TripEvent): Promise<Advice> {
    return this.request<Advice>("POST", `/sessions/${sessionId}/events`, event);
  }
}
