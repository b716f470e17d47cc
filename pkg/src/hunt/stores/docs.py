"""Document shapes for the two persisted indices plus store configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

from ..dataset import FEATURE_NAMES, NetworkFlow
from ..errors import BadFilter

DETECTED_INDEX = "detected-packets"
ORIGINAL_INDEX = "original-packets"
SESSIONS_INDEX = "chat-sessions"

MAX_PAGE_SIZE = 500


def utc_now() -> str:
    """UTC RFC 3339 timestamp with millisecond precision."""
    return (datetime.now(timezone.utc).isoformat(timespec="milliseconds")
            .replace("+00:00", "Z"))


@dataclass(frozen=True)
class DetectedPacketDoc:
    id: str
    prediction: dict       # {label, genre, is_anomalous, probabilities}
    factors: tuple         # ({feature, condition, weight, direction, description},)
    exp_img: str           # LIME plot artifact URI
    shap_img: str          # SHAP plot artifact URI
    original_data: str     # foreign key into original-packets
    detected_at: str       # UTC RFC 3339
    model_version: str
    explanation_error: str | None = None

    def to_json(self):
        return {
            "id": self.id,
            "prediction": self.prediction,
            "factors": list(self.factors),
            "exp_img": self.exp_img,
            "shap_img": self.shap_img,
            "original_data": self.original_data,
            "detected_at": self.detected_at,
            "model_version": self.model_version,
            "explanation_error": self.explanation_error,
        }

    @staticmethod
    def from_json(obj):
        return DetectedPacketDoc(
            id=obj["id"], prediction=obj["prediction"],
            factors=tuple(obj["factors"]), exp_img=obj["exp_img"],
            shap_img=obj["shap_img"], original_data=obj["original_data"],
            detected_at=obj["detected_at"], model_version=obj["model_version"],
            explanation_error=obj.get("explanation_error"))


@dataclass(frozen=True)
class OriginalPacketDoc:
    id: str
    features: dict  # all 41 KDD fields verbatim
    label: str | None
    ingest_batch: str
    ingested_at: str

    @staticmethod
    def from_flow(flow: NetworkFlow, doc_id: str, batch: str, ingested_at: str):
        return OriginalPacketDoc(
            id=doc_id, features=flow.as_dict(), label=flow.label,
            ingest_batch=batch, ingested_at=ingested_at)

    def to_flow(self) -> NetworkFlow:
        return NetworkFlow(tuple(self.features[n] for n in FEATURE_NAMES),
                           self.label)

    def to_json(self):
        return {"id": self.id, "features": self.features, "label": self.label,
                "ingest_batch": self.ingest_batch,
                "ingested_at": self.ingested_at}

    @staticmethod
    def from_json(obj):
        return OriginalPacketDoc(
            id=obj["id"], features=obj["features"], label=obj.get("label"),
            ingest_batch=obj["ingest_batch"], ingested_at=obj["ingested_at"])


@dataclass(frozen=True)
class QueryPage:
    docs: tuple
    total: int
    page: int
    page_size: int

    def to_json(self):
        return {"docs": [d.to_json() for d in self.docs], "total": self.total,
                "page": self.page, "page_size": self.page_size}


@dataclass
class StoreConfig:
    """Backend selection. Credentials are referenced by env var name only."""

    backend: str = "embedded"               # embedded | elasticsearch
    root: str = ""                          # embedded: directory for segments
    endpoint: str = ""                      # elasticsearch: base URL
    api_key_env: str = "HUNT_ES_API_KEY"
    detected_index: str = DETECTED_INDEX
    original_index: str = ORIGINAL_INDEX
    sessions_index: str = SESSIONS_INDEX
    object_store: dict = field(default_factory=lambda: {"backend": "localdir",
                                                        "root": ""})

    def to_json(self):
        # credential material never appears here: only env var names do
        return {
            "backend": self.backend, "root": self.root,
            "endpoint": self.endpoint, "api_key_env": self.api_key_env,
            "detected_index": self.detected_index,
            "original_index": self.original_index,
            "sessions_index": self.sessions_index,
            "object_store": dict(self.object_store),
        }


def validate_filter(filters: dict):
    allowed = {"is_anomalous", "class", "from", "to", "page", "page_size"}
    unknown = set(filters) - allowed
    if unknown:
        raise BadFilter(f"unknown filter keys: {sorted(unknown)}")
    page = filters.get("page", 1)
    page_size = filters.get("page_size", 50)
    if not isinstance(page, int) or page < 1:
        raise BadFilter("page must be a positive integer")
    if not isinstance(page_size, int) or not (1 <= page_size <= MAX_PAGE_SIZE):
        raise BadFilter(f"page_size must be in 1..{MAX_PAGE_SIZE}")
    if "is_anomalous" in filters and not isinstance(filters["is_anomalous"], bool):
        raise BadFilter("is_anomalous must be a boolean")
    return page, page_size


def matches(doc: DetectedPacketDoc, filters: dict) -> bool:
    if "is_anomalous" in filters and doc.prediction.get("is_anomalous") != filters["is_anomalous"]:
        return False
    if "class" in filters and doc.prediction.get("label") != filters["class"]:
        return False
    if "from" in filters and doc.detected_at < filters["from"]:
        return False
    if "to" in filters and doc.detected_at > filters["to"]:
        return False
    return True
