"""Elasticsearch-compatible REST backend: plain HTTP/JSON, no vendor client.

Uses only index-exists, put-mapping, index-doc, get-doc, and bool-filtered
search so any wire-compatible store works.
"""

from __future__ import annotations

import json
import os
from importlib import resources

import requests

from ..errors import (AuthFailed, ForeignKeyMissing, MappingConflict, NotFound,
                      Unreachable, WriteConflict)
from .docs import (DetectedPacketDoc, OriginalPacketDoc, QueryPage, utc_now,
                   validate_filter)
from .ids import new_ulid


def load_mappings() -> dict:
    text = resources.files("hunt.data").joinpath("index_mappings.json").read_text()
    return json.loads(text)


def _mapping_compatible(wanted: dict, existing: dict) -> bool:
    """Every field we rely on must exist with the same type structure."""
    for field, spec in wanted.items():
        got = existing.get(field)
        if got is None:
            return False
        if "properties" in spec:
            if "properties" not in got:
                return False
            if not _mapping_compatible(spec["properties"], got["properties"]):
                return False
        elif "type" in spec:
            if got.get("type", "object") != spec["type"]:
                return False
    return True


class ElasticStore:
    def __init__(self, config, artifact_store=None, clock=utc_now,
                 session: requests.Session | None = None):
        self.config = config
        self.artifact_store = artifact_store
        self.clock = clock
        self.session = session or requests.Session()
        self.base = config.endpoint.rstrip("/")
        self._mappings = load_mappings()
        self._index_names = {
            "detected-packets": config.detected_index,
            "original-packets": config.original_index,
            "chat-sessions": config.sessions_index,
        }

    def _headers(self):
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"ApiKey {api_key}"
        return headers

    def _request(self, method, path, body=None):
        try:
            resp = self.session.request(method, self.base + path,
                                        json=body, headers=self._headers(),
                                        timeout=10)
        except requests.RequestException as e:
            raise Unreachable(f"elasticsearch unreachable: {e}") from None
        if resp.status_code in (401, 403):
            raise AuthFailed(f"elasticsearch auth failed ({resp.status_code})")
        return resp

    # --- index management ---

    def ensure_indices(self) -> dict:
        status = {}
        for logical, mapping in self._mappings.items():
            name = self._index_names[logical]
            head = self._request("HEAD", f"/{name}")
            if head.status_code == 404:
                resp = self._request("PUT", f"/{name}", mapping)
                if resp.status_code not in (200, 201):
                    raise Unreachable(f"could not create index {name}: "
                                      f"{resp.status_code} {resp.text[:200]}")
                status[logical] = "created"
                continue
            resp = self._request("GET", f"/{name}/_mapping")
            existing = resp.json().get(name, {}).get("mappings", {}) \
                .get("properties", {})
            wanted = mapping["mappings"]["properties"]
            if not _mapping_compatible(wanted, existing):
                raise MappingConflict(
                    f"index {name} exists with an incompatible mapping")
            status[logical] = "verified"
        return status

    # --- documents ---

    def _put_doc(self, index, doc_id, body):
        resp = self._request("PUT", f"/{index}/_doc/{doc_id}?refresh=true", body)
        if resp.status_code not in (200, 201):
            raise Unreachable(f"index write failed: {resp.status_code} "
                              f"{resp.text[:200]}")

    def _get_doc(self, index, doc_id):
        resp = self._request("GET", f"/{index}/_doc/{doc_id}")
        if resp.status_code == 404:
            raise NotFound(f"document {doc_id} not found in {index}")
        if resp.status_code != 200:
            raise Unreachable(f"get failed: {resp.status_code}")
        return resp.json()["_source"]

    def _exists(self, index, doc_id) -> bool:
        resp = self._request("HEAD", f"/{index}/_doc/{doc_id}")
        return resp.status_code == 200

    def index_original(self, flow, batch: str) -> str:
        for _ in range(2):
            doc = OriginalPacketDoc.from_flow(flow, new_ulid(), batch, self.clock())
            if self._exists(self.config.original_index, doc.id):
                continue
            self._put_doc(self.config.original_index, doc.id, doc.to_json())
            return doc.id
        raise WriteConflict("could not allocate a unique original-packet id")

    def get_original(self, doc_id: str) -> OriginalPacketDoc:
        return OriginalPacketDoc.from_json(
            self._get_doc(self.config.original_index, doc_id))

    def index_detected(self, doc: DetectedPacketDoc) -> str:
        if not self._exists(self.config.original_index, doc.original_data):
            raise ForeignKeyMissing(
                f"original_data {doc.original_data!r} does not resolve")
        if self.artifact_store is not None:
            for uri in (doc.exp_img, doc.shap_img):
                if uri and not self.artifact_store.exists(uri):
                    raise ForeignKeyMissing(f"artifact URI {uri!r} does not resolve")
        self._put_doc(self.config.detected_index, doc.id, doc.to_json())
        return doc.id

    def get_detected(self, doc_id: str) -> DetectedPacketDoc:
        return DetectedPacketDoc.from_json(
            self._get_doc(self.config.detected_index, doc_id))

    def query_detected(self, filters: dict | None = None) -> QueryPage:
        filters = dict(filters or {})
        page, page_size = validate_filter(filters)
        must = []
        if "is_anomalous" in filters:
            must.append({"term": {"prediction.is_anomalous": filters["is_anomalous"]}})
        if "class" in filters:
            must.append({"term": {"prediction.label": filters["class"]}})
        time_range = {}
        if "from" in filters:
            time_range["gte"] = filters["from"]
        if "to" in filters:
            time_range["lte"] = filters["to"]
        if time_range:
            must.append({"range": {"detected_at": time_range}})
        body = {
            "query": {"bool": {"filter": must}} if must else {"match_all": {}},
            "sort": [{"detected_at": "desc"}, {"id": "desc"}],
            "from": (page - 1) * page_size,
            "size": page_size,
            "track_total_hits": True,
        }
        resp = self._request("POST", f"/{self.config.detected_index}/_search", body)
        if resp.status_code != 200:
            raise Unreachable(f"search failed: {resp.status_code} {resp.text[:200]}")
        payload = resp.json()
        docs = tuple(DetectedPacketDoc.from_json(h["_source"])
                     for h in payload["hits"]["hits"])
        total = payload["hits"]["total"]
        total = total["value"] if isinstance(total, dict) else total
        return QueryPage(docs, int(total), page, page_size)

    def count(self, index: str) -> int:
        resp = self._request("GET", f"/{index}/_count")
        if resp.status_code != 200:
            raise Unreachable(f"count failed: {resp.status_code}")
        return int(resp.json()["count"])

    # --- chat sessions ---

    def put_session(self, session: dict) -> str:
        self._put_doc(self.config.sessions_index, session["id"], session)
        return session["id"]

    def get_session(self, session_id: str) -> dict:
        return self._get_doc(self.config.sessions_index, session_id)

    def ping(self) -> bool:
        try:
            return self._request("GET", "/").status_code == 200
        except (Unreachable, AuthFailed):
            return False
