import { describe, expect, it } from "vitest";

import { ApiClient, ApiFailure, isAbort } from "../src/api.js";

function fakeFetch(handler: (url: string, init?: RequestInit) => Promise<Response>) {
  return handler;
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("posts JSON and returns the body", async () => {
    const seen: { url?: string; body?: unknown } = {};
    const client = new ApiClient("http://x", fakeFetch(async (url, init) => {
      seen.url = url;
      seen.body = JSON.parse(String(init?.body));
      return jsonResponse({ ok: 1 });
    }));
    const out = await client.post<{ ok: number }>("c", "/v1/preview", { design: { theta: 5 } });
    expect(out.ok).toBe(1);
    expect(seen.url).toBe("http://x/v1/preview");
    expect(seen.body).toEqual({ design: { theta: 5 } });
  });

  it("raises ApiFailure with the server message on error statuses", async () => {
    const client = new ApiClient("", fakeFetch(async () =>
      jsonResponse({ schema_version: "1", error: "narrow the assessment interval" }, 422)));
    await expect(client.post("c", "/v1/optimize/estimation", {}))
      .rejects.toMatchObject({ status: 422 });
    try {
      await client.post("c", "/v1/optimize/estimation", {});
    } catch (err) {
      expect(err).toBeInstanceOf(ApiFailure);
      expect((err as ApiFailure).body.error).toMatch(/narrow/);
    }
  });

  it("cancels the pending request on the same channel", async () => {
    const aborted: boolean[] = [];
    const client = new ApiClient("", fakeFetch((_url, init) =>
      new Promise<Response>((resolve, reject) => {
        const signal = init?.signal;
        signal?.addEventListener("abort", () => {
          aborted.push(true);
          reject(new DOMException("aborted", "AbortError"));
        });
        setTimeout(() => resolve(jsonResponse({ ok: true })), 30);
      })));
    const first = client.post("optimize", "/v1/optimize/estimation", { a: 1 });
    const second = client.post("optimize", "/v1/optimize/estimation", { a: 2 });
    await expect(first).rejects.toSatisfy(isAbort);
    await expect(second).resolves.toEqual({ ok: true });
    expect(aborted).toEqual([true]);
  });

  it("keeps separate channels independent", async () => {
    const client = new ApiClient("", fakeFetch(async () => jsonResponse({ ok: true })));
    const preview = client.post("preview", "/v1/preview", {});
    const optimize = client.post("optimize", "/v1/optimize/estimation", {});
    await expect(preview).resolves.toEqual({ ok: true });
    await expect(optimize).resolves.toEqual({ ok: true });
  });
});
