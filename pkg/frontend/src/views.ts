/** Pure projections of API documents into view models. No mutation of the
 * underlying detection data, and no DOM here: these are unit-testable maps.
 */

import type { ChatTurn, DetectionDoc, Factor, SessionDoc } from "./api.js";

export interface DetectionRow {
  id: string;
  time: string;
  class: string;
  genre: string;
  confidence: number;
  anomalous: boolean;
}

export interface ExplanationView {
  shapPlotUri: string;
  limePlotUri: string;
  factors: Factor[];
  error: string | null;
}

export interface ChatView {
  sessionId: string;
  turns: ChatTurn[];
  pending: boolean;
}

export function toDetectionRow(doc: DetectionDoc): DetectionRow {
  const pred = doc.prediction;
  return {
    id: doc.id,
    time: doc.detected_at,
    class: pred.label,
    genre: pred.genre,
    confidence: pred.probabilities[pred.label] ?? 0,
    anomalous: pred.is_anomalous,
  };
}

/** Factor table ordering: strongest evidence first. */
export function sortFactors(factors: readonly Factor[]): Factor[] {
  return [...factors].sort(
    (a, b) => Math.abs(b.weight) - Math.abs(a.weight),
  );
}

export function toExplanationView(doc: DetectionDoc): ExplanationView {
  return {
    shapPlotUri: doc.shap_img,
    limePlotUri: doc.exp_img,
    factors: sortFactors(doc.factors),
    error: doc.explanation_error,
  };
}

export function toChatView(session: SessionDoc, pending = false): ChatView {
  return {
    sessionId: session.id,
    // the system preamble is operator plumbing, not conversation
    turns: session.turns.filter((t) => t.role !== "system"),
    pending,
  };
}

export function formatConfidence(value: number): string {
  return `${(100 * value).toFixed(1)}%`;
}

export function reportFilename(id: string, format: "html" | "json"): string {
  return format === "json"
    ? `hunt-report-${id}.json`
    : `hunt-report-${id}.html`;
}
