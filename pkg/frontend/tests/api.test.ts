import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, assertAllowedPath, listQuery } from "../src/api.js";
import { FakeServer } from "./fixtures.js";

describe("ApiClient", () => {
  it("refuses any path outside /api/v1 and /ui", () => {
    expect(() => assertAllowedPath("/healthz")).toThrow(/blocked/);
    expect(() => assertAllowedPath("https://evil.test/x")).toThrow(/blocked/);
    expect(() => assertAllowedPath("/api/v2/detections")).toThrow(/blocked/);
    expect(() => assertAllowedPath("/api/v1/detections")).not.toThrow();
    expect(() => assertAllowedPath("/ui/index.html")).not.toThrow();
  });

  it("builds list query strings from filters", () => {
    expect(listQuery({})).toBe("");
    expect(listQuery({ class: "dos", page: 2 })).toBe("?class=dos&page=2");
    expect(listQuery({ is_anomalous: false })).toBe("?is_anomalous=false");
  });

  it("parses the server error envelope into ApiError", async () => {
    const client = new ApiClient(new FakeServer().fetch);
    await expect(client.getDetection("missing")).rejects.toMatchObject({
      name: "ApiError",
      status: 404,
      code: "not_found",
    });
  });

  it("attaches the bearer token when configured", async () => {
    let seen: Record<string, string> | undefined;
    const fetchFn = async (_: string, init?: RequestInit) => {
      seen = init?.headers as Record<string, string>;
      return new Response(JSON.stringify({ docs: [], total: 0, page: 1, page_size: 50 }));
    };
    await new ApiClient(fetchFn, "sekrit").listDetections({});
    expect(seen?.["Authorization"]).toBe("Bearer sekrit");
  });

  it("round-trips detections against the fixture server", async () => {
    const client = new ApiClient(new FakeServer().fetch);
    const page = await client.listDetections({ class: "dos" });
    expect(page.total).toBe(3);
    const doc = await client.getDetection(page.docs[0].id);
    expect(doc.prediction.label).toBe("dos");
    const svg = await client.getPlot(doc.id, "shap");
    expect(svg).toContain("<svg");
  });

  it("falls back to a generic error on non-JSON failure bodies", async () => {
    const fetchFn = async () => new Response("boom", { status: 500 });
    const client = new ApiClient(fetchFn);
    try {
      await client.getDetection("x");
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).code).toBe("http_error");
    }
  });
});
