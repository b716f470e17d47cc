"""Embedded document store: append-only JSON-lines segments per index with
an in-memory id -> offset map rebuilt on open. Writes are serialized per
index; reads are lock-free after lookup."""

from __future__ import annotations

import json
import os
import threading

from ..errors import (ForeignKeyMissing, MappingConflict, NotFound,
                      WriteConflict)
from .docs import (DETECTED_INDEX, ORIGINAL_INDEX, SESSIONS_INDEX,
                   DetectedPacketDoc, OriginalPacketDoc, QueryPage, matches,
                   utc_now, validate_filter)
from .ids import new_ulid

_MARKER = {"format": "hunt-jsonl", "version": 1}


class _Segment:
    def __init__(self, path):
        self.path = path
        self.lock = threading.Lock()
        self.offsets = {}   # id -> byte offset
        self.order = []     # insertion order of ids
        if os.path.exists(path):
            self._rebuild()
        else:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(_MARKER) + "\n")

    def _rebuild(self):
        with open(self.path, "rb") as fh:
            header = fh.readline()
            marker = json.loads(header)
            if marker.get("format") != "hunt-jsonl":
                raise MappingConflict(f"{self.path} is not a hunt segment")
            if marker.get("version") != 1:
                raise MappingConflict(f"unsupported segment version in {self.path}")
            offset = fh.tell()
            for line in fh:
                doc = json.loads(line)
                self.offsets[doc["id"]] = offset
                self.order.append(doc["id"])
                offset += len(line)

    def append(self, doc: dict):
        line = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
        with self.lock:
            if doc["id"] in self.offsets:
                raise WriteConflict(f"id collision: {doc['id']}")
            with open(self.path, "a", encoding="utf-8") as fh:
                offset = fh.tell()
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
            self.offsets[doc["id"]] = offset
            self.order.append(doc["id"])

    def get(self, doc_id: str) -> dict:
        offset = self.offsets.get(doc_id)
        if offset is None:
            raise NotFound(f"document {doc_id} not found in {self.path}")
        with open(self.path, "rb") as fh:
            fh.seek(offset)
            return json.loads(fh.readline())

    def all_docs(self):
        for doc_id in list(self.order):
            yield self.get(doc_id)

    def __contains__(self, doc_id):
        return doc_id in self.offsets

    def __len__(self):
        return len(self.offsets)


class EmbeddedStore:
    def __init__(self, root: str, artifact_store=None, clock=utc_now):
        self.root = root
        self.artifact_store = artifact_store
        self.clock = clock
        os.makedirs(root, exist_ok=True)
        self._segments = {}
        self._ensured = False

    def _segment(self, index: str) -> _Segment:
        if index not in self._segments:
            self._segments[index] = _Segment(os.path.join(self.root, f"{index}.jsonl"))
        return self._segments[index]

    def ensure_indices(self) -> dict:
        status = {}
        for index in (DETECTED_INDEX, ORIGINAL_INDEX, SESSIONS_INDEX):
            path = os.path.join(self.root, f"{index}.jsonl")
            existed = os.path.exists(path)
            self._segment(index)
            status[index] = "verified" if existed else "created"
        self._ensured = True
        return status

    # --- originals ---

    def index_original(self, flow, batch: str) -> str:
        stamp = self.clock()
        # regenerate the id once on the (vanishingly rare) ULID collision
        for _ in range(2):
            doc = OriginalPacketDoc.from_flow(flow, new_ulid(), batch, stamp)
            try:
                self._segment(ORIGINAL_INDEX).append(doc.to_json())
                return doc.id
            except WriteConflict:
                continue
        raise WriteConflict("could not allocate a unique original-packet id")

    def get_original(self, doc_id: str) -> OriginalPacketDoc:
        return OriginalPacketDoc.from_json(self._segment(ORIGINAL_INDEX).get(doc_id))

    # --- detections ---

    def index_detected(self, doc: DetectedPacketDoc) -> str:
        if doc.original_data not in self._segment(ORIGINAL_INDEX):
            raise ForeignKeyMissing(
                f"original_data {doc.original_data!r} does not resolve")
        if self.artifact_store is not None:
            for uri in (doc.exp_img, doc.shap_img):
                if uri and not self.artifact_store.exists(uri):
                    raise ForeignKeyMissing(f"artifact URI {uri!r} does not resolve")
        self._segment(DETECTED_INDEX).append(doc.to_json())
        return doc.id

    def get_detected(self, doc_id: str) -> DetectedPacketDoc:
        return DetectedPacketDoc.from_json(self._segment(DETECTED_INDEX).get(doc_id))

    def query_detected(self, filters: dict | None = None) -> QueryPage:
        filters = dict(filters or {})
        page, page_size = validate_filter(filters)
        docs = [DetectedPacketDoc.from_json(d)
                for d in self._segment(DETECTED_INDEX).all_docs()]
        hits = [d for d in docs if matches(d, filters)]
        hits.sort(key=lambda d: (d.detected_at, d.id), reverse=True)
        start = (page - 1) * page_size
        return QueryPage(tuple(hits[start:start + page_size]), len(hits),
                         page, page_size)

    def count(self, index: str) -> int:
        return len(self._segment(index))

    # --- chat sessions ---

    def put_session(self, session: dict) -> str:
        seg = self._segment(SESSIONS_INDEX)
        # sessions are mutable (turns grow): latest append wins on read
        line_doc = dict(session)
        with seg.lock:
            payload = json.dumps(line_doc, sort_keys=True, separators=(",", ":")) + "\n"
            with open(seg.path, "a", encoding="utf-8") as fh:
                offset = fh.tell()
                fh.write(payload)
                fh.flush()
            seg.offsets[line_doc["id"]] = offset
            if line_doc["id"] not in seg.order:
                seg.order.append(line_doc["id"])
        return line_doc["id"]

    def get_session(self, session_id: str) -> dict:
        return self._segment(SESSIONS_INDEX).get(session_id)

    def ping(self) -> bool:
        try:
            os.listdir(self.root)
            return True
        except OSError:
            return False
