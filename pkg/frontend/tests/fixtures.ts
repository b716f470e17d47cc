/** In-memory stand-in for the detection console API, seeded with canned
 * documents shaped exactly like the server's responses. Chat follows a
 * recorded script: a known question yields a known reply.
 */

import type { DetectionDoc, OriginalDoc, SessionDoc } from "../src/api.js";

export const RECORDED_QUESTION =
  "How can I prevent such an attack in the future?";
export const RECORDED_REPLY =
  "To prevent DoS attacks, you can implement measures like traffic " +
  "monitoring, firewalls, load balancers, and rate limiting.";

const SVG =
  '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 640 360">' +
  "<rect width=\"640\" height=\"360\"/></svg>";

function detection(
  id: string,
  label: string,
  genre: string,
  detectedAt: string,
): DetectionDoc {
  const anomalous = label !== "normal";
  return {
    id,
    detected_at: detectedAt,
    batch: "fixture",
    original_data: `orig-${id}`,
    prediction: {
      label,
      genre,
      is_anomalous: anomalous,
      probabilities: { [label]: 0.97, normal: anomalous ? 0.03 : 0.97 },
      model_version: "fixturemodel1",
    },
    factors: [
      {
        feature: "count",
        weight: 0.12,
        direction: "supports",
        source: "lime",
        description: "count > 3 supports " + label,
      },
      {
        feature: "src_bytes",
        weight: -0.31,
        direction: "opposes",
        source: "shap",
        description: "src_bytes pushes away from " + label,
      },
      {
        feature: "serror_rate",
        weight: 0.22,
        direction: "supports",
        source: "shap",
        description: "serror_rate supports " + label,
      },
    ],
    exp_img: anomalous ? `file://plots/${id}-lime.svg` : "",
    shap_img: anomalous ? `file://plots/${id}-shap.svg` : "",
    explanation_error: null,
    model_version: "fixturemodel1",
  };
}

export const DETECTIONS: DetectionDoc[] = [
  detection("det-1", "dos", "neptune (SYN flood)", "2024-05-01T10:00:00.000Z"),
  detection("det-2", "dos", "smurf (ICMP flood)", "2024-05-01T10:01:00.000Z"),
  detection("det-3", "probe", "nmap (port scan)", "2024-05-01T10:02:00.000Z"),
  detection("det-4", "dos", "neptune (SYN flood)", "2024-05-01T10:03:00.000Z"),
  detection("det-5", "r2l", "guess_passwd (password guessing)", "2024-05-01T10:04:00.000Z"),
];

function original(doc: DetectionDoc): OriginalDoc {
  return {
    id: doc.original_data,
    ingested_at: doc.detected_at,
    batch: doc.batch,
    features: {
      duration: 0,
      protocol_type: "tcp",
      service: "http",
      flag: "S0",
      src_bytes: 0,
      count: 123,
    },
  };
}

interface FakeServerOptions {
  assistantDisabled?: boolean;
}

export class FakeServer {
  readonly requests: string[] = [];
  private readonly sessions = new Map<string, SessionDoc>();
  private nextSession = 1;

  constructor(private readonly options: FakeServerOptions = {}) {}

  readonly fetch = async (
    input: string,
    init?: RequestInit,
  ): Promise<Response> => {
    this.requests.push(input);
    return this.route(input, init);
  };

  private json(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private error(status: number, code: string, message: string): Response {
    return this.json({ error: { code, message } }, status);
  }

  private route(input: string, init?: RequestInit): Response {
    const url = new URL(input, "http://fixture");
    const path = url.pathname;

    let match = /^\/api\/v1\/detections\/?$/.exec(path);
    if (match) {
      let docs = [...DETECTIONS].sort((a, b) =>
        b.detected_at.localeCompare(a.detected_at),
      );
      const klass = url.searchParams.get("class");
      if (klass) docs = docs.filter((d) => d.prediction.label === klass);
      const anomalous = url.searchParams.get("is_anomalous");
      if (anomalous !== null) {
        docs = docs.filter(
          (d) => String(d.prediction.is_anomalous) === anomalous,
        );
      }
      return this.json({
        docs,
        total: docs.length,
        page: Number(url.searchParams.get("page") ?? 1),
        page_size: 50,
      });
    }

    match = /^\/api\/v1\/detections\/([^/]+)$/.exec(path);
    if (match) {
      const doc = DETECTIONS.find((d) => d.id === match![1]);
      return doc
        ? this.json(doc)
        : this.error(404, "not_found", "no such detection");
    }

    match = /^\/api\/v1\/detections\/([^/]+)\/original$/.exec(path);
    if (match) {
      const doc = DETECTIONS.find((d) => d.id === match![1]);
      return doc
        ? this.json(original(doc))
        : this.error(404, "not_found", "no such detection");
    }

    match = /^\/api\/v1\/detections\/([^/]+)\/plots\/(shap|lime)$/.exec(path);
    if (match) {
      const doc = DETECTIONS.find((d) => d.id === match![1]);
      if (!doc) return this.error(404, "not_found", "no such detection");
      return new Response(SVG, {
        status: 200,
        headers: { "Content-Type": "image/svg+xml" },
      });
    }

    match = /^\/api\/v1\/detections\/([^/]+)\/analyze$/.exec(path);
    if (match && init?.method === "POST") {
      if (this.options.assistantDisabled) {
        return this.error(503, "store_unavailable", "assistant is disabled");
      }
      const doc = DETECTIONS.find((d) => d.id === match![1]);
      if (!doc) return this.error(404, "not_found", "no such detection");
      const id = `sess-${this.nextSession++}`;
      this.sessions.set(id, {
        id,
        detection_id: doc.id,
        turns: [
          { role: "system", text: "You are a security analyst assistant." },
          { role: "user", text: "Analyze this detection." },
          { role: "assistant", text: "This looks like a SYN flood." },
        ],
      });
      return this.json({
        session_id: id,
        analysis: "This looks like a SYN flood.",
      });
    }

    match = /^\/api\/v1\/sessions\/([^/]+)$/.exec(path);
    if (match) {
      const session = this.sessions.get(match[1]);
      return session
        ? this.json(session)
        : this.error(404, "session_not_found", "no such session");
    }

    match = /^\/api\/v1\/sessions\/([^/]+)\/chat$/.exec(path);
    if (match && init?.method === "POST") {
      if (this.options.assistantDisabled) {
        return this.error(503, "store_unavailable", "assistant is disabled");
      }
      const session = this.sessions.get(match[1]);
      if (!session) {
        return this.error(404, "session_not_found", "no such session");
      }
      const message = JSON.parse(String(init.body)).message as string;
      const reply =
        message === RECORDED_QUESTION
          ? RECORDED_REPLY
          : `noted: ${message}`;
      session.turns.push({ role: "user", text: message });
      session.turns.push({ role: "assistant", text: reply });
      return this.json({ reply });
    }

    match = /^\/api\/v1\/detections\/([^/]+)\/report$/.exec(path);
    if (match) {
      const doc = DETECTIONS.find((d) => d.id === match![1]);
      if (!doc) return this.error(404, "not_found", "no such detection");
      if (url.searchParams.get("format") === "json") {
        return this.json({ detection: doc, warnings: 0 });
      }
      return new Response(
        `<!DOCTYPE html><html><body>report for ${doc.id}</body></html>`,
        { status: 200, headers: { "Content-Type": "text/html" } },
      );
    }

    return this.error(404, "not_found", `unrouted path ${path}`);
  }
}
