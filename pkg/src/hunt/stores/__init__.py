"""Persistence for detections, originals, chat sessions, and plot artifacts."""

from .docs import (DetectedPacketDoc, OriginalPacketDoc, QueryPage, StoreConfig,
                   utc_now)
from .embedded import EmbeddedStore
from .elastic import ElasticStore
from .ids import new_ulid
from .objects import LocalDirArtifactStore, S3CompatArtifactStore

__all__ = [
    "DetectedPacketDoc", "OriginalPacketDoc", "QueryPage", "StoreConfig",
    "EmbeddedStore", "ElasticStore", "LocalDirArtifactStore",
    "S3CompatArtifactStore", "new_ulid", "open_store", "open_artifact_store",
    "utc_now",
]


def open_store(config: StoreConfig, **kwargs):
    if config.backend == "embedded":
        return EmbeddedStore(config.root, **kwargs)
    if config.backend == "elasticsearch":
        return ElasticStore(config, **kwargs)
    raise ValueError(f"unknown store backend {config.backend!r}")


def open_artifact_store(config: StoreConfig):
    obj = config.object_store
    if obj.get("backend", "localdir") == "localdir":
        return LocalDirArtifactStore(obj["root"])
    if obj["backend"] == "s3compat":
        return S3CompatArtifactStore(
            endpoint=obj["endpoint"], bucket=obj["bucket"],
            key_id_env=obj.get("key_id_env", "HUNT_S3_KEY_ID"),
            secret_env=obj.get("secret_env", "HUNT_S3_SECRET"))
    raise ValueError(f"unknown object store backend {obj['backend']!r}")
