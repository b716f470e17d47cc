/** Single-page triage app: detection table, explanation viewer, original
 * packet inspector, per-detection chat, and report download — all driven by
 * the HTTP API and addressable through the URL hash.
 */

import { ApiClient, ApiError } from "./api.js";
import type { DetectionDoc, OriginalDoc } from "./api.js";
import { AppState, DEFAULT_STATE, Tab, decodeState, encodeState } from "./state.js";
import {
  formatConfidence,
  reportFilename,
  toChatView,
  toDetectionRow,
  toExplanationView,
} from "./views.js";

const MIN_POLL_MS = 5000;
const CLASSES = ["", "normal", "dos", "probe", "r2l", "u2r"];

export type DownloadFn = (
  filename: string,
  content: string,
  mime: string,
) => void;

export interface AppOptions {
  pollIntervalMs?: number;
  location?: { hash: string };
  download?: DownloadFn;
}

function browserDownload(filename: string, content: string, mime: string) {
  const url = URL.createObjectURL(new Blob([content], { type: mime }));
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class App {
  state: AppState = { ...DEFAULT_STATE };
  private readonly location: { hash: string };
  private readonly download: DownloadFn;
  private readonly pollIntervalMs: number;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private chatPending = false;
  private assistantOffline = false;
  private rendering: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    options: AppOptions = {},
  ) {
    this.location = options.location ?? window.location;
    this.download = options.download ?? browserDownload;
    this.pollIntervalMs = Math.max(
      MIN_POLL_MS,
      options.pollIntervalMs ?? 2 * MIN_POLL_MS,
    );
  }

  async start(): Promise<void> {
    this.state = decodeState(this.location.hash || "");
    await this.render();
  }

  /** One in-flight render at a time; callers may await the returned chain. */
  render(): Promise<void> {
    this.rendering = this.rendering.then(() => this.renderNow());
    return this.rendering;
  }

  async navigate(state: AppState): Promise<void> {
    this.state = state;
    this.location.hash = encodeState(state);
    await this.render();
  }

  startPolling(): void {
    if (this.pollTimer !== null) return;
    this.pollTimer = setInterval(() => {
      if (this.state.view === "list") void this.render();
    }, this.pollIntervalMs);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
    this.pollTimer = null;
  }

  private async renderNow(): Promise<void> {
    try {
      if (this.state.view === "list") {
        await this.renderList();
      } else {
        await this.renderDetail();
      }
    } catch (err) {
      this.renderBanner(err);
    }
  }

  // --- list view -----------------------------------------------------------

  private async renderList(): Promise<void> {
    const page = await this.api.listDetections({
      class: this.state.class,
      genre: this.state.genre,
      is_anomalous: this.state.is_anomalous,
      page: this.state.page,
    });
    const rows = page.docs.map(toDetectionRow);

    const view = el("div", "view view-list");
    view.appendChild(el("h1", "", "Detections"));
    view.appendChild(this.filterBar());

    const table = el("table", "detections");
    const head = el("tr");
    for (const label of ["Time", "Class", "Genre", "Confidence", ""]) {
      head.appendChild(el("th", "", label));
    }
    table.appendChild(head);
    for (const row of rows) {
      const tr = el("tr", "detection-row");
      tr.dataset.id = row.id;
      tr.appendChild(el("td", "time", row.time));
      tr.appendChild(el("td", `class class-${row.class}`, row.class));
      tr.appendChild(el("td", "genre", row.genre));
      tr.appendChild(el("td", "confidence", formatConfidence(row.confidence)));
      const badge = el("td", "badge");
      if (row.anomalous) badge.appendChild(el("span", "anomaly", "anomaly"));
      tr.appendChild(badge);
      tr.addEventListener("click", () => {
        void this.navigate({ view: "detail", id: row.id, page: 1 });
      });
      table.appendChild(tr);
    }
    view.appendChild(table);

    const pager = el("div", "pager");
    pager.appendChild(
      el("span", "total", `${page.total} detection(s), page ${page.page}`),
    );
    view.appendChild(pager);

    this.swap(view);
  }

  private filterBar(): HTMLElement {
    const bar = el("div", "filters");
    const select = el("select", "filter-class");
    for (const klass of CLASSES) {
      const option = el("option", "", klass || "all classes");
      option.value = klass;
      select.appendChild(option);
    }
    select.value = this.state.class ?? "";
    select.addEventListener("change", () => {
      void this.navigate({
        ...this.state,
        class: select.value || undefined,
        page: 1,
      });
    });
    bar.appendChild(select);

    const anomalous = el("input", "filter-anomalous");
    anomalous.type = "checkbox";
    anomalous.checked = this.state.is_anomalous === true;
    anomalous.addEventListener("change", () => {
      void this.navigate({
        ...this.state,
        is_anomalous: anomalous.checked ? true : undefined,
        page: 1,
      });
    });
    const label = el("label", "filter-anomalous-label", "anomalous only ");
    label.prepend(anomalous);
    bar.appendChild(label);
    return bar;
  }

  // --- detail view ---------------------------------------------------------

  private async renderDetail(): Promise<void> {
    const id = this.state.id!;
    const doc = await this.api.getDetection(id);
    const original = await this.api.getOriginal(id);
    const tab: Tab = this.state.tab ?? "inspect";

    const view = el("div", "view view-detail");
    const back = el("a", "back", "< back to detections");
    back.href = "#/detections";
    back.addEventListener("click", (event) => {
      event.preventDefault();
      void this.navigate({ ...DEFAULT_STATE });
    });
    view.appendChild(back);

    view.appendChild(el("h1", "", `Detection ${doc.id}`));
    const summary = el("p", "summary");
    summary.textContent =
      `${doc.prediction.label} / ${doc.prediction.genre} — ` +
      `confidence ${formatConfidence(
        doc.prediction.probabilities[doc.prediction.label] ?? 0,
      )} — model ${doc.model_version}`;
    view.appendChild(summary);

    view.appendChild(this.tabBar(tab));
    if (tab === "inspect") {
      view.appendChild(this.inspectPanel(original));
    } else if (tab === "explain") {
      view.appendChild(await this.explainPanel(doc));
    } else {
      view.appendChild(await this.chatPanel(doc));
    }
    view.appendChild(this.reportBar(doc));
    this.swap(view);
  }

  private tabBar(active: Tab): HTMLElement {
    const bar = el("div", "tabs");
    const tabs: Tab[] = ["inspect", "explain", "chat"];
    for (const tab of tabs) {
      const button = el(
        "button",
        `tab tab-${tab}${tab === active ? " active" : ""}`,
        tab,
      );
      button.addEventListener("click", () => {
        void this.navigate({ ...this.state, tab });
      });
      bar.appendChild(button);
    }
    return bar;
  }

  private inspectPanel(original: OriginalDoc): HTMLElement {
    const panel = el("div", "panel panel-inspect");
    panel.appendChild(el("h2", "", "Original packet"));
    const table = el("table", "features");
    for (const [name, value] of Object.entries(original.features)) {
      const tr = el("tr");
      tr.appendChild(el("td", "feature-name", name));
      tr.appendChild(el("td", "feature-value", String(value)));
      table.appendChild(tr);
    }
    panel.appendChild(table);
    return panel;
  }

  private async explainPanel(doc: DetectionDoc): Promise<HTMLElement> {
    const panel = el("div", "panel panel-explain");
    const explanation = toExplanationView(doc);
    if (explanation.error) {
      panel.appendChild(
        el("p", "explanation-error", `explanation unavailable: ${explanation.error}`),
      );
      return panel;
    }
    for (const which of ["shap", "lime"] as const) {
      const box = el("div", `plot plot-${which}`);
      box.appendChild(el("h2", "", `${which.toUpperCase()} plot`));
      try {
        const svg = await this.api.getPlot(doc.id, which);
        const holder = el("div", "plot-svg");
        holder.innerHTML = svg;
        box.appendChild(holder);
      } catch {
        box.appendChild(el("p", "plot-missing", "plot unavailable"));
      }
      panel.appendChild(box);
    }
    const table = el("table", "factors");
    for (const factor of explanation.factors) {
      const tr = el("tr", `factor factor-${factor.source}`);
      tr.appendChild(el("td", "", factor.feature));
      tr.appendChild(el("td", "", factor.weight.toFixed(4)));
      tr.appendChild(el("td", "", factor.direction));
      tr.appendChild(el("td", "", factor.description));
      table.appendChild(tr);
    }
    panel.appendChild(table);
    return panel;
  }

  // --- chat ----------------------------------------------------------------

  private async chatPanel(doc: DetectionDoc): Promise<HTMLElement> {
    const panel = el("div", "panel panel-chat");
    panel.appendChild(el("h2", "", "AI assistant"));

    if (!this.state.session && !this.assistantOffline) {
      try {
        const opened = await this.api.analyze(doc.id);
        this.state = { ...this.state, session: opened.session_id };
        this.location.hash = encodeState(this.state);
      } catch (err) {
        if (err instanceof ApiError && err.status === 503) {
          this.assistantOffline = true;
        } else {
          throw err;
        }
      }
    }

    if (this.assistantOffline || !this.state.session) {
      panel.appendChild(el("p", "assistant-offline", "assistant offline"));
      const input = el("input", "chat-input");
      input.disabled = true;
      panel.appendChild(input);
      return panel;
    }

    const session = await this.api.getSession(this.state.session);
    const chat = toChatView(session, this.chatPending);
    const transcript = el("div", "transcript");
    for (const turn of chat.turns) {
      transcript.appendChild(el("div", `turn turn-${turn.role}`, turn.text));
    }
    if (chat.pending) {
      transcript.appendChild(el("div", "turn turn-pending", "…"));
    }
    panel.appendChild(transcript);

    const input = el("input", "chat-input");
    input.placeholder = "ask about this detection";
    input.disabled = chat.pending;
    const send = el("button", "chat-send", "send");
    send.disabled = chat.pending;
    send.addEventListener("click", () => {
      const message = input.value.trim();
      if (message) void this.sendChat(message);
    });
    panel.appendChild(input);
    panel.appendChild(send);
    return panel;
  }

  /** Optimistic echo: the user's message renders immediately with a pending
   * marker; at most one chat request is in flight per session. */
  async sendChat(message: string): Promise<void> {
    if (this.chatPending || !this.state.session) return;
    this.chatPending = true;
    const transcript = this.root.querySelector(".transcript");
    if (transcript) {
      const echo = el("div", "turn turn-user turn-echo", message);
      transcript.appendChild(echo);
      transcript.appendChild(el("div", "turn turn-pending", "…"));
    }
    try {
      await this.api.chat(this.state.session, message);
    } catch (err) {
      this.chatPending = false;
      this.renderBanner(err);
      return;
    }
    this.chatPending = false;
    await this.render();
  }

  // --- report --------------------------------------------------------------

  private reportBar(doc: DetectionDoc): HTMLElement {
    const bar = el("div", "report-bar");
    for (const format of ["html", "json"] as const) {
      const button = el("button", `report report-${format}`, `report (${format})`);
      button.addEventListener("click", () => {
        void this.downloadReport(doc.id, format);
      });
      bar.appendChild(button);
    }
    return bar;
  }

  async downloadReport(id: string, format: "html" | "json"): Promise<void> {
    try {
      const content = await this.api.fetchReport(
        id,
        format,
        this.state.session ?? "",
      );
      const mime = format === "json" ? "application/json" : "text/html";
      this.download(reportFilename(id, format), content, mime);
    } catch (err) {
      this.renderBanner(err);
    }
  }

  // --- errors --------------------------------------------------------------

  /** API failures render as a dismissible banner with retry — never a blank
   * screen: existing content stays put underneath. */
  private renderBanner(err: unknown): void {
    this.root.querySelector(".banner")?.remove();
    const banner = el("div", "banner");
    const message =
      err instanceof ApiError
        ? `${err.code}: ${err.message}`
        : String(err instanceof Error ? err.message : err);
    banner.appendChild(el("span", "banner-message", message));
    const retry = el("button", "banner-retry", "retry");
    retry.addEventListener("click", () => {
      banner.remove();
      void this.render();
    });
    banner.appendChild(retry);
    const dismiss = el("button", "banner-dismiss", "dismiss");
    dismiss.addEventListener("click", () => banner.remove());
    banner.appendChild(dismiss);
    this.root.prepend(banner);
  }

  private swap(view: HTMLElement): void {
    const banner = this.root.querySelector(".banner");
    this.root.replaceChildren(view);
    if (banner) this.root.prepend(banner);
  }
}
