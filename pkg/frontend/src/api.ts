/** Typed client for the detection console HTTP API.
 *
 * Every request is checked against an allow-list: the dashboard may only
 * talk to /api/v1 and /ui. Anything else throws before touching the network.
 */

export interface Prediction {
  label: string;
  genre: string;
  is_anomalous: boolean;
  probabilities: Record<string, number>;
  model_version: string;
}

export interface Factor {
  feature: string;
  weight: number;
  direction: string;
  source: string;
  description: string;
}

export interface DetectionDoc {
  id: string;
  detected_at: string;
  batch: string;
  original_data: string;
  prediction: Prediction;
  factors: Factor[];
  exp_img: string;
  shap_img: string;
  explanation_error: string | null;
  model_version: string;
}

export interface DetectionPage {
  docs: DetectionDoc[];
  total: number;
  page: number;
  page_size: number;
}

export interface OriginalDoc {
  id: string;
  ingested_at: string;
  batch: string;
  features: Record<string, string | number>;
}

export interface ChatTurn {
  role: string;
  text: string;
}

export interface SessionDoc {
  id: string;
  detection_id: string;
  turns: ChatTurn[];
}

export interface ExplanationDoc {
  shap: { predicted_class: string; top_features: [string, number][] };
  lime: { factors: unknown[] };
  factor_text: string[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

const ALLOWED_PREFIXES = ["/api/v1/", "/ui/"];

export function assertAllowedPath(path: string): void {
  if (!ALLOWED_PREFIXES.some((p) => path.startsWith(p))) {
    throw new Error(`blocked request outside the API surface: ${path}`);
  }
}

export interface ListFilters {
  class?: string;
  genre?: string;
  is_anomalous?: boolean;
  page?: number;
  page_size?: number;
}

export function listQuery(filters: ListFilters): string {
  const params = new URLSearchParams();
  if (filters.class) params.set("class", filters.class);
  if (filters.genre) params.set("genre", filters.genre);
  if (filters.is_anomalous !== undefined) {
    params.set("is_anomalous", String(filters.is_anomalous));
  }
  if (filters.page) params.set("page", String(filters.page));
  if (filters.page_size) params.set("page_size", String(filters.page_size));
  const qs = params.toString();
  return qs ? `?${qs}` : "";
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly token: string = "",
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    assertAllowedPath(path);
    const headers: Record<string, string> = {
      ...(init?.headers as Record<string, string> | undefined),
    };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const resp = await this.fetchFn(path, { ...init, headers });
    if (!resp.ok) {
      let code = "http_error";
      let message = `HTTP ${resp.status}`;
      try {
        const body = await resp.json();
        if (body?.error) {
          code = body.error.code ?? code;
          message = body.error.message ?? message;
        }
      } catch {
        /* non-JSON error body; keep defaults */
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.request(path, init);
    return (await resp.json()) as T;
  }

  listDetections(filters: ListFilters): Promise<DetectionPage> {
    return this.json(`/api/v1/detections${listQuery(filters)}`);
  }

  getDetection(id: string): Promise<DetectionDoc> {
    return this.json(`/api/v1/detections/${encodeURIComponent(id)}`);
  }

  getOriginal(id: string): Promise<OriginalDoc> {
    return this.json(`/api/v1/detections/${encodeURIComponent(id)}/original`);
  }

  getExplanation(id: string): Promise<ExplanationDoc> {
    return this.json(
      `/api/v1/detections/${encodeURIComponent(id)}/explanation`,
    );
  }

  async getPlot(id: string, which: "shap" | "lime"): Promise<string> {
    const resp = await this.request(
      `/api/v1/detections/${encodeURIComponent(id)}/plots/${which}`,
    );
    return await resp.text();
  }

  analyze(id: string): Promise<{ session_id: string; analysis: string }> {
    return this.json(`/api/v1/detections/${encodeURIComponent(id)}/analyze`, {
      method: "POST",
    });
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.json(`/api/v1/sessions/${encodeURIComponent(sessionId)}`);
  }

  chat(sessionId: string, message: string): Promise<{ reply: string }> {
    return this.json(
      `/api/v1/sessions/${encodeURIComponent(sessionId)}/chat`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ message }),
      },
    );
  }

  async fetchReport(
    id: string,
    format: "html" | "json",
    sessionId: string = "",
  ): Promise<string> {
    const params = new URLSearchParams();
    if (format === "json") params.set("format", "json");
    if (sessionId) params.set("session_id", sessionId);
    const qs = params.toString();
    const resp = await this.request(
      `/api/v1/detections/${encodeURIComponent(id)}/report${qs ? `?${qs}` : ""}`,
    );
    return await resp.text();
  }
}
