"""Analyst assistant: prompt assembly, LLM transports, chat sessions, reports.

Transports speak the chat-completions JSON shape. Tests and offline use
rely on the mock (digest echo) and replay (recorded prompt digest ->
response) kinds; a replay miss is a hard failure, never a live fallback.
"""

from __future__ import annotations

import hashlib
import html
import json
import os
import threading
import time
from dataclasses import dataclass, field
from importlib import resources

import requests

from .dataset import FEATURE_NAMES
from .errors import (ArtifactMissing, ContextOverflow, FixtureMiss, NotFound,
                     SessionNotFound, TemplateMissing, TransportError)
from .stores import new_ulid, utc_now
from .stores.docs import DetectedPacketDoc, OriginalPacketDoc

DEFAULT_CONTEXT_BUDGET = 12000  # estimated tokens
DEFAULT_TEMPERATURE = 0.2

# original-flow fields surfaced in prompts (keep prompts small; the full
# record is one click away in the dashboard)
PROMPT_FLOW_FIELDS = (
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes",
    "logged_in", "count", "srv_count", "serror_rate", "rerror_rate",
    "same_srv_rate", "dst_host_count",
)


def estimate_tokens(text: str) -> int:
    return (len(text) + 3) // 4


def _template(name: str) -> str:
    try:
        return resources.files("hunt.data").joinpath(name).read_text()
    except FileNotFoundError:
        raise TemplateMissing(f"prompt template {name} not found") from None


def system_preamble() -> str:
    return _template("system_preamble.txt")


def messages_digest(messages) -> str:
    payload = json.dumps(messages, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# --- transports -------------------------------------------------------------

@dataclass(frozen=True)
class TransportConfig:
    kind: str = "mock"                       # live | mock | replay
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-3.5-turbo"
    temperature: float = DEFAULT_TEMPERATURE
    api_key_env: str = "HUNT_LLM_API_KEY"
    fixture_path: str = ""                   # replay only

    def snapshot(self) -> dict:
        # persisted with sessions; never includes credential material
        return {"kind": self.kind, "model": self.model,
                "temperature": self.temperature}


class MockTransport:
    """Deterministic offline transport: echoes a digest of the prompt."""

    kind = "mock"

    def __init__(self, config: TransportConfig | None = None):
        self.config = config or TransportConfig(kind="mock")

    def complete(self, messages) -> str:
        return "MOCK:" + messages_digest(messages)


class ReplayTransport:
    """Answers only from recorded (prompt digest -> response) fixtures."""

    kind = "replay"

    def __init__(self, fixture, config: TransportConfig | None = None):
        if isinstance(fixture, str):
            with open(fixture, "r", encoding="utf-8") as fh:
                fixture = json.load(fh)
        self.responses = {e["prompt_digest"]: e["response_text"] for e in fixture}
        self.config = config or TransportConfig(kind="replay")

    def complete(self, messages) -> str:
        digest = messages_digest(messages)
        if digest not in self.responses:
            raise FixtureMiss(f"no recorded response for prompt digest {digest}")
        return self.responses[digest]


class LiveTransport:
    """Chat-completions HTTPS transport with bounded retry."""

    kind = "live"

    def __init__(self, config: TransportConfig, session=None,
                 max_attempts: int = 3, backoff: float = 0.5):
        self.config = config
        self.session = session or requests.Session()
        self.max_attempts = max_attempts
        self.backoff = backoff

    def complete(self, messages) -> str:
        api_key = os.environ.get(self.config.api_key_env, "")
        body = {"model": self.config.model, "messages": messages,
                "temperature": self.config.temperature}
        headers = {"Authorization": f"Bearer {api_key}",
                   "Content-Type": "application/json"}
        last = None
        for attempt in range(self.max_attempts):
            try:
                resp = self.session.post(self.config.endpoint, json=body,
                                         headers=headers, timeout=60)
                if resp.status_code == 200:
                    return resp.json()["choices"][0]["message"]["content"]
                last = f"status {resp.status_code}"
            except requests.RequestException as e:
                last = str(e)
            if attempt + 1 < self.max_attempts:
                time.sleep(self.backoff * (2 ** attempt))
        raise TransportError(f"llm endpoint failed after "
                             f"{self.max_attempts} attempts: {last}")


def open_transport(config: TransportConfig):
    if config.kind == "mock":
        return MockTransport(config)
    if config.kind == "replay":
        return ReplayTransport(config.fixture_path, config)
    if config.kind == "live":
        return LiveTransport(config)
    raise ValueError(f"unknown transport kind {config.kind!r}")


# --- prompt assembly -----------------------------------------------------------

@dataclass(frozen=True)
class PromptBundle:
    system_preamble: str
    detection_context: str
    user_message: str
    history: tuple = ()

    def messages(self):
        msgs = [{"role": "system", "content": self.system_preamble}]
        msgs.extend({"role": t["role"], "content": t["text"]}
                    for t in self.history)
        content = (self.detection_context + "\n\n" + self.user_message
                   if self.detection_context else self.user_message)
        msgs.append({"role": "user", "content": content})
        return msgs

    def token_estimate(self):
        return sum(estimate_tokens(m["content"]) for m in self.messages())


def build_analysis_prompt(doc: DetectedPacketDoc, original: OriginalPacketDoc,
                          budget: int = DEFAULT_CONTEXT_BUDGET) -> PromptBundle:
    """Deterministic analysis prompt from versioned templates.

    When over budget, factors are dropped lowest-|weight| first; the
    prediction line is never dropped.
    """
    if doc.original_data != original.id:
        raise ValueError("detection does not reference this original packet")
    preamble = system_preamble()
    template = _template("analysis_prompt.txt")
    template = "\n".join(l for l in template.splitlines()
                         if not l.startswith("# template-version")).strip()

    pred = doc.prediction
    confidence = max(pred.get("probabilities", {}).values(), default=0.0)
    flow_lines = "\n".join(f"  {k}: {original.features[k]}"
                           for k in PROMPT_FLOW_FIELDS)
    probabilities = ", ".join(f"{k}={v:.4f}"
                              for k, v in sorted(pred["probabilities"].items()))

    factors = sorted(doc.factors, key=lambda f: -abs(f.get("weight", 0.0)))
    while True:
        factor_lines = "\n".join(
            f"  {f['description']}" for f in factors) or "  (none recorded)"
        body = template.format(label=pred["label"], genre=pred["genre"],
                               confidence=f"{confidence:.4f}",
                               probabilities=probabilities,
                               factor_lines=factor_lines,
                               flow_lines=flow_lines)
        context, _, request = body.rpartition("\n\n")
        bundle = PromptBundle(preamble, context, request)
        if bundle.token_estimate() <= budget:
            return bundle
        if not factors:
            raise ContextOverflow(
                "minimal prompt exceeds the model context budget")
        factors = factors[:-1]  # drop the lowest-|weight| factor


# --- chat sessions -----------------------------------------------------------------

@dataclass
class ChatSession:
    id: str
    detection_id: str
    turns: list                  # {role, text, timestamp}
    transport: dict              # TransportConfig.snapshot()
    created_at: str

    def to_json(self):
        return {"id": self.id, "detection_id": self.detection_id,
                "turns": list(self.turns), "transport": self.transport,
                "created_at": self.created_at}

    @staticmethod
    def from_json(obj):
        return ChatSession(obj["id"], obj["detection_id"], list(obj["turns"]),
                           obj["transport"], obj["created_at"])


class AssistantService:
    """Per-detection analysis and chat with per-session mutual exclusion."""

    def __init__(self, transport, store=None, clock=utc_now,
                 budget: int = DEFAULT_CONTEXT_BUDGET):
        self.transport = transport
        self.store = store
        self.clock = clock
        self.budget = budget
        self._locks = {}
        self._locks_guard = threading.Lock()

    def _lock(self, session_id):
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _persist(self, session: ChatSession):
        if self.store is not None:
            self.store.put_session(session.to_json())

    def analyze_detection(self, doc: DetectedPacketDoc,
                          original: OriginalPacketDoc):
        """One analysis round-trip; returns (analysis text, ChatSession)."""
        bundle = build_analysis_prompt(doc, original, self.budget)
        messages = bundle.messages()
        analysis = self.transport.complete(messages)
        now = self.clock()
        session = ChatSession(
            id=new_ulid(),
            detection_id=doc.id,
            turns=[
                {"role": "system", "text": bundle.system_preamble, "timestamp": now},
                {"role": "user", "text": messages[-1]["content"], "timestamp": now},
                {"role": "assistant", "text": analysis, "timestamp": now},
            ],
            transport=getattr(self.transport, "config",
                              TransportConfig()).snapshot(),
            created_at=now,
        )
        self._persist(session)
        return analysis, session

    def load_session(self, session_id: str) -> ChatSession:
        if self.store is None:
            raise SessionNotFound(f"session {session_id} not found")
        try:
            return ChatSession.from_json(self.store.get_session(session_id))
        except NotFound:
            raise SessionNotFound(f"session {session_id} not found") from None

    def chat_turn(self, session: ChatSession, user_message: str) -> str:
        """Send the in-budget history plus the new message; append both turns."""
        with self._lock(session.id):
            turns = list(session.turns)
            candidate = turns + [{"role": "user", "text": user_message}]
            # evict oldest non-system turns while over budget
            while True:
                total = sum(estimate_tokens(t["text"]) for t in candidate)
                if total <= self.budget:
                    break
                drop = next((i for i, t in enumerate(candidate)
                             if t["role"] != "system"), None)
                if drop is None or candidate[drop] is candidate[-1]:
                    raise ContextOverflow("chat message exceeds context budget")
                candidate.pop(drop)
            messages = [{"role": t["role"], "content": t["text"]}
                        for t in candidate]
            reply = self.transport.complete(messages)
            now = self.clock()
            session.turns.append({"role": "user", "text": user_message,
                                  "timestamp": now})
            session.turns.append({"role": "assistant", "text": reply,
                                  "timestamp": now})
            self._persist(session)
            return reply


# --- incident report -----------------------------------------------------------------

@dataclass(frozen=True)
class ReportDoc:
    html: str
    sidecar: dict
    warnings: int = 0


def _svg_or_placeholder(artifact_store, uri, title, warnings):
    try:
        if artifact_store is None:
            raise ArtifactMissing("no artifact store configured")
        data = artifact_store.get_artifact(uri)
        return data.decode("utf-8"), warnings
    except Exception:
        placeholder = (f'<div class="missing-plot">[plot unavailable: '
                       f'{html.escape(title)}]</div>')
        return placeholder, warnings + 1


def generate_report(detection_id: str, store, artifact_store=None,
                    session: ChatSession | None = None,
                    clock=utc_now) -> ReportDoc:
    """Self-contained HTML incident report plus a JSON sidecar.

    Missing artifacts degrade to placeholders with a nonzero warning count;
    a missing detection is an error.
    """
    doc = store.get_detected(detection_id)  # raises NotFound
    original = store.get_original(doc.original_data)
    warnings = 0
    shap_svg, warnings = _svg_or_placeholder(artifact_store, doc.shap_img,
                                             "SHAP plot", warnings)
    lime_svg, warnings = _svg_or_placeholder(artifact_store, doc.exp_img,
                                             "LIME plot", warnings)

    factor_rows = "\n".join(
        "<tr><td>{}</td><td>{}</td><td>{:+.4f}</td><td>{}</td></tr>".format(
            html.escape(str(f.get("feature", ""))),
            html.escape(str(f.get("condition", ""))),
            float(f.get("weight", 0.0)),
            html.escape(str(f.get("direction", ""))))
        for f in doc.factors)
    flow_rows = "\n".join(
        f"<tr><td>{html.escape(name)}</td>"
        f"<td>{html.escape(str(original.features[name]))}</td></tr>"
        for name in FEATURE_NAMES)
    if session and session.turns:
        transcript = "\n".join(
            f'<div class="turn turn-{html.escape(t["role"])}">'
            f'<b>{html.escape(t["role"])}</b>: '
            f'{html.escape(t["text"])}</div>'
            for t in session.turns if t["role"] != "system")
    else:
        transcript = "<p>No analyst conversation was recorded for this detection.</p>"

    generated_at = clock()
    pred = doc.prediction
    page = f"""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Incident report {html.escape(doc.id)}</title>
<style>
body {{ font-family: sans-serif; margin: 2em; color: #222; }}
table {{ border-collapse: collapse; margin: 1em 0; }}
td, th {{ border: 1px solid #ccc; padding: 4px 8px; font-size: 13px; }}
.missing-plot {{ border: 1px dashed #c00; color: #c00; padding: 2em; }}
.turn {{ margin: 0.5em 0; }}
</style>
</head>
<body>
<h1>Incident report</h1>
<table>
<tr><th>Detection id</th><td>{html.escape(doc.id)}</td></tr>
<tr><th>Detected at</th><td>{html.escape(doc.detected_at)}</td></tr>
<tr><th>Verdict</th><td>{html.escape(pred["label"])}
 ({"anomalous" if pred["is_anomalous"] else "normal"})</td></tr>
<tr><th>Genre</th><td>{html.escape(pred["genre"])}</td></tr>
<tr><th>Model version</th><td>{html.escape(doc.model_version)}</td></tr>
<tr><th>Generated at</th><td>{html.escape(generated_at)}</td></tr>
</table>
<h2>Explanation plots</h2>
{shap_svg}
{lime_svg}
<h2>Contributing factors</h2>
<table>
<tr><th>Feature</th><th>Condition</th><th>Weight</th><th>Direction</th></tr>
{factor_rows}
</table>
<h2>Original flow record</h2>
<table>
<tr><th>Field</th><th>Value</th></tr>
{flow_rows}
</table>
<h2>Analyst conversation</h2>
{transcript}
</body>
</html>
"""
    sidecar = {
        "detection": doc.to_json(),
        "original": original.to_json(),
        "session": session.to_json() if session else None,
        "generated_at": generated_at,
        "warnings": warnings,
    }
    return ReportDoc(page, sidecar, warnings)
