"""Record the committed analyst chat fixture.

Runs the real pipeline against the committed fixture model to obtain a
deterministic DoS detection, then records a scripted analyst conversation
as (prompt digest -> response) pairs that the replay transport serves
byte-for-byte. Outputs:

  tests/fixtures/chat_replay.json  - replay transport fixture
  tests/fixtures/chat_script.json  - flow, user turns, expected replies
"""

import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hunt.assistant import AssistantService, messages_digest  # noqa: E402
from hunt.dataset import parse_kdd_csv, split  # noqa: E402
from hunt.forest import load  # noqa: E402
from hunt.server import Pipeline  # noqa: E402
from hunt.stores import EmbeddedStore, LocalDirArtifactStore  # noqa: E402

HERE = os.path.dirname(__file__)
FIX = os.path.join(HERE, "..", "tests", "fixtures")

ANALYSIS_REPLY = """\
This flow was classified as a denial-of-service attack with high confidence. \
The traffic pattern shows a large number of connections to the same service \
in a short window combined with elevated error rates, which is the signature \
of a flooding attack rather than legitimate load. Severity is high if the \
targeted service is production-facing: sustained floods exhaust connection \
tables and bandwidth. Immediate steps: confirm the spike on the affected \
host's connection counters, apply rate limiting or upstream filtering for \
the offending source range, and watch the same service for follow-on \
probes. If the flood persists, engage your upstream provider for traffic \
scrubbing."""

TURNS = [
    (
        "How can I prevent such attack",
        "To prevent DoS attacks, you can implement measures like traffic "
        "monitoring, firewalls, load balancers, and rate limiting to detect "
        "and mitigate abnormal traffic patterns. Ensuring network redundancy "
        "and having a robust incident response plan can also help minimize "
        "the impact.",
    ),
    (
        "What is a firewall and how do I implement it with some good "
        "firewall examples",
        "A firewall is a network security device that filters incoming and "
        "outgoing network traffic based on predetermined security rules. "
        "Examples of good firewalls include:\n"
        "Cisco ASA (Adaptive Security Appliance), Palo Alto Networks "
        "Next-Generation Firewalls, Fortinet FortiGate Firewalls, Check "
        "Point Firewall. To implement a firewall, configure rule sets to "
        "allow or block specific types of network traffic and define "
        "security policies to secure your network from unauthorized access.",
    ),
    (
        "Are there any free ones?",
        "Yes, there are free firewall solutions available. Some popular free "
        "firewall options include:\n"
        "ZoneAlarm: ZoneAlarm offers a free version of their firewall "
        "software for personal use, providing basic firewall protection "
        "along with additional features like identity protection and "
        "anti-phishing.\n"
        "Windows Firewall: If you are using a Windows operating system, it "
        "comes with a built-in firewall called Windows Firewall. It provides "
        "basic inbound and outbound traffic filtering capabilities.\n"
        "These free firewall solutions can offer varying levels of "
        "protection and features.",
    ),
]


class RecordingTransport:
    """Serves a scripted queue of replies while recording prompt digests."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.recorded = []

    def complete(self, messages):
        reply = self.replies.pop(0)
        self.recorded.append({"prompt_digest": messages_digest(messages),
                              "response_text": reply})
        return reply


def pick_dos_flow(model):
    with open(os.path.join(FIX, "kdd_sample.csv"), "r", encoding="utf-8") as fh:
        data = parse_kdd_csv(fh)
    _, test = split(data, 0.2, 7)
    for flow in test.rows:
        pred = model.predict(flow)
        if pred.class_label == "dos":
            return flow
    raise SystemExit("no dos flow found in the test split")


def main():
    with open(os.path.join(FIX, "model_small.json"), "rb") as fh:
        model = load(fh)
    flow = pick_dos_flow(model)

    with tempfile.TemporaryDirectory() as tmp:
        artifacts = LocalDirArtifactStore(os.path.join(tmp, "artifacts"))
        store = EmbeddedStore(os.path.join(tmp, "store"),
                              artifact_store=artifacts)
        store.ensure_indices()
        pipeline = Pipeline(model, store, artifacts)
        event = pipeline.process_flow(flow, "chat-fixture")
        doc = store.get_detected(event["detection_id"])
        original = store.get_original(doc.original_data)

        transport = RecordingTransport(
            [ANALYSIS_REPLY] + [reply for _, reply in TURNS])
        service = AssistantService(transport, store=store)
        _, session = service.analyze_detection(doc, original)
        for question, _ in TURNS:
            service.chat_turn(session, question)

    with open(os.path.join(FIX, "chat_replay.json"), "w", encoding="utf-8") as fh:
        json.dump(transport.recorded, fh, indent=1, sort_keys=True)
    script = {
        "flow": {"features": flow.as_dict(), "label": flow.label},
        "analysis_reply": ANALYSIS_REPLY,
        "turns": [{"user": q, "assistant": r} for q, r in TURNS],
    }
    with open(os.path.join(FIX, "chat_script.json"), "w", encoding="utf-8") as fh:
        json.dump(script, fh, indent=1, sort_keys=True)
    print(f"recorded {len(transport.recorded)} exchanges")


if __name__ == "__main__":
    main()
