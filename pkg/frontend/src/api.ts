/** HTTP client with one in-flight request per channel.
 *
 * A new submission on the same channel aborts the pending one, so stale
 * responses can never overwrite newer results.
 */

import type { ApiError } from "./types.js";

export class ApiFailure extends Error {
  constructor(public status: number, public body: ApiError) {
    super(body.error ?? `HTTP ${status}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(private baseUrl: string = "", private fetchImpl: FetchLike = fetch) {}

  /** POST on a named channel; cancels any pending request on that channel. */
  async post<T>(channel: string, path: string, payload: unknown): Promise<T> {
    const prev = this.inflight.get(channel);
    if (prev) prev.abort();
    const ctrl = new AbortController();
    this.inflight.set(channel, ctrl);
    try {
      const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
        signal: ctrl.signal,
      });
      const body = await resp.json();
      if (!resp.ok) throw new ApiFailure(resp.status, body as ApiError);
      return body as T;
    } finally {
      if (this.inflight.get(channel) === ctrl) this.inflight.delete(channel);
    }
  }

  async health(): Promise<{ status: string; version: string }> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/health`);
    return resp.json();
  }
}

export function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}
