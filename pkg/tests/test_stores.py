import copy
import json
import os
import re
import threading
from urllib.parse import urlparse

import pytest
import requests

from hunt.dataset import parse_kdd_csv
from hunt.errors import (AuthFailed, BadFilter, ForeignKeyMissing,
                         IntegrityError, MappingConflict, NotFound,
                         Unreachable, WriteConflict)
from hunt.stores import (DetectedPacketDoc, EmbeddedStore, ElasticStore,
                         LocalDirArtifactStore, StoreConfig, new_ulid,
                         open_artifact_store, open_store, utc_now)
from hunt.stores.docs import MAX_PAGE_SIZE
from hunt.stores.elastic import load_mappings

GOOD_LINE = (
    "0,tcp,http,SF,215,45076,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,1,1,"
    "0.00,0.00,0.00,0.00,1.00,0.00,0.00,0,0,0.00,0.00,0.00,0.00,"
    "0.00,0.00,0.00,0.00,normal."
)
FLOW = parse_kdd_csv(GOOD_LINE).rows[0]


def make_detected(original_id, when=None, label="dos", exp="", shap=""):
    return DetectedPacketDoc(
        id=new_ulid(),
        prediction={"label": label, "genre": label, "is_anomalous":
                    label != "normal", "probabilities": {label: 1.0},
                    "model_version": "abc123abc123"},
        factors=({"feature": "count", "condition": "count > 3", "weight": 0.5,
                  "direction": "supports", "description": "count high"},),
        exp_img=exp, shap_img=shap, original_data=original_id,
        detected_at=when or utc_now(), model_version="abc123abc123")


# --- in-memory Elasticsearch wire fake -------------------------------------

class _Resp:
    def __init__(self, status_code, payload=None):
        self.status_code = status_code
        self._payload = payload if payload is not None else {}
        self.text = json.dumps(self._payload)

    def json(self):
        return self._payload


class FakeElasticSession:
    """Implements the subset of the wire protocol the client uses."""

    def __init__(self, require_key=""):
        self.indices = {}  # name -> {"mapping": ..., "docs": {id: doc}}
        self.require_key = require_key

    def request(self, method, url, json=None, headers=None, timeout=None):
        if self.require_key:
            if (headers or {}).get("Authorization") != f"ApiKey {self.require_key}":
                return _Resp(401)
        path = urlparse(url).path.rstrip("/")
        query = urlparse(url).query
        if path == "":
            return _Resp(200, {"cluster_name": "fake"})
        parts = path.lstrip("/").split("/")
        index = parts[0]
        if len(parts) == 1:
            if method == "HEAD":
                return _Resp(200 if index in self.indices else 404)
            if method == "PUT":
                self.indices[index] = {"mapping": copy.deepcopy(json),
                                       "docs": {}}
                return _Resp(200, {"acknowledged": True})
        if index not in self.indices:
            return _Resp(404)
        idx = self.indices[index]
        if parts[1:] == ["_mapping"]:
            return _Resp(200, {index: {"mappings": idx["mapping"]["mappings"]}})
        if parts[1:] == ["_count"]:
            return _Resp(200, {"count": len(idx["docs"])})
        if parts[1:] == ["_search"]:
            return self._search(idx, json)
        if len(parts) == 3 and parts[1] == "_doc":
            doc_id = parts[2]
            if method == "PUT":
                assert "refresh=true" in query
                idx["docs"][doc_id] = json
                return _Resp(201, {"result": "created"})
            if method == "HEAD":
                return _Resp(200 if doc_id in idx["docs"] else 404)
            if method == "GET":
                if doc_id not in idx["docs"]:
                    return _Resp(404)
                return _Resp(200, {"_source": idx["docs"][doc_id]})
        return _Resp(400)

    def _search(self, idx, body):
        def field(doc, dotted):
            for part in dotted.split("."):
                doc = doc[part]
            return doc

        hits = list(idx["docs"].values())
        query = body.get("query", {})
        for clause in query.get("bool", {}).get("filter", []):
            if "term" in clause:
                ((name, value),) = clause["term"].items()
                hits = [d for d in hits if field(d, name) == value]
            elif "range" in clause:
                ((name, bounds),) = clause["range"].items()
                if "gte" in bounds:
                    hits = [d for d in hits if field(d, name) >= bounds["gte"]]
                if "lte" in bounds:
                    hits = [d for d in hits if field(d, name) <= bounds["lte"]]
        hits.sort(key=lambda d: (d["detected_at"], d["id"]), reverse=True)
        total = len(hits)
        start = body.get("from", 0)
        hits = hits[start:start + body.get("size", 10)]
        return _Resp(200, {"hits": {"total": {"value": total},
                                    "hits": [{"_source": d} for d in hits]}})


class ExplodingSession:
    def request(self, *a, **k):
        raise requests.ConnectionError("boom")


# --- backends under test ----------------------------------------------------

LIVE_ES = os.environ.get("HUNT_ES_INTEGRATION") == "1" and \
    os.environ.get("HUNT_ES_URL")

BACKENDS = ["embedded", "elastic_fake"] + (["elastic_live"] if LIVE_ES else [])


@pytest.fixture(params=BACKENDS)
def store(request, tmp_path):
    artifacts = LocalDirArtifactStore(str(tmp_path / "artifacts"))
    if request.param == "embedded":
        s = EmbeddedStore(str(tmp_path / "segments"), artifact_store=artifacts)
    elif request.param == "elastic_fake":
        config = StoreConfig(backend="elasticsearch", endpoint="http://fake")
        s = ElasticStore(config, artifact_store=artifacts,
                         session=FakeElasticSession())
    else:
        suffix = new_ulid().lower()
        config = StoreConfig(
            backend="elasticsearch", endpoint=os.environ["HUNT_ES_URL"],
            detected_index=f"test-detected-{suffix}",
            original_index=f"test-original-{suffix}",
            sessions_index=f"test-sessions-{suffix}")
        s = ElasticStore(config, artifact_store=artifacts)
    s.ensure_indices()
    s.artifacts = artifacts
    return s


def test_ensure_indices_created_then_verified(store):
    assert set(store.ensure_indices().values()) <= {"created", "verified"}


def test_original_round_trip(store):
    doc_id = store.index_original(FLOW, "batch-1")
    doc = store.get_original(doc_id)
    assert doc.features == FLOW.as_dict()
    assert doc.label == "normal"
    assert doc.ingest_batch == "batch-1"
    assert doc.to_flow().values == FLOW.values


def test_detected_round_trip_and_fk(store):
    with pytest.raises(ForeignKeyMissing):
        store.index_detected(make_detected("nonexistent-id"))
    original_id = store.index_original(FLOW, "b")
    det = make_detected(original_id)
    store.index_detected(det)
    got = store.get_detected(det.id)
    assert got.to_json() == det.to_json()


def test_detected_artifact_uris_must_resolve(store):
    original_id = store.index_original(FLOW, "b")
    bad = make_detected(original_id, exp="file:///does/not/exist.svg")
    with pytest.raises(ForeignKeyMissing):
        store.index_detected(bad)
    uri = store.artifacts.put_artifact(b"<svg/>", "image/svg+xml")
    ok = make_detected(original_id, exp=uri, shap=uri)
    store.index_detected(ok)
    assert store.get_detected(ok.id).exp_img == uri


def test_get_missing_raises_not_found(store):
    with pytest.raises(NotFound):
        store.get_original("missing")
    with pytest.raises(NotFound):
        store.get_detected("missing")
    with pytest.raises(NotFound):
        store.get_session("missing")


def test_query_filters_sort_and_pagination(store):
    original_id = store.index_original(FLOW, "b")
    stamps = [f"2024-01-0{i}T00:00:00.000Z" for i in range(1, 8)]
    docs = []
    for i, ts in enumerate(stamps):
        label = "dos" if i % 2 == 0 else "probe"
        d = make_detected(original_id, when=ts, label=label)
        store.index_detected(d)
        docs.append(d)

    page = store.query_detected({})
    assert page.total == 7
    got = [d.detected_at for d in page.docs]
    assert got == sorted(stamps, reverse=True)

    dos = store.query_detected({"class": "dos"})
    assert dos.total == 4
    assert all(d.prediction["label"] == "dos" for d in dos.docs)

    window = store.query_detected({"from": stamps[2], "to": stamps[4]})
    assert window.total == 3

    p1 = store.query_detected({"page": 1, "page_size": 3})
    p2 = store.query_detected({"page": 2, "page_size": 3})
    assert len(p1.docs) == 3 and len(p2.docs) == 3
    assert {d.id for d in p1.docs}.isdisjoint({d.id for d in p2.docs})

    anom = store.query_detected({"is_anomalous": True})
    assert anom.total == 7


def test_bad_filters_rejected(store):
    with pytest.raises(BadFilter):
        store.query_detected({"bogus": 1})
    with pytest.raises(BadFilter):
        store.query_detected({"page": 0})
    with pytest.raises(BadFilter):
        store.query_detected({"page_size": MAX_PAGE_SIZE + 1})
    with pytest.raises(BadFilter):
        store.query_detected({"is_anomalous": "yes"})


def test_session_put_get_latest_wins(store):
    session = {"id": new_ulid(), "detection_id": "d", "turns": [],
               "transport": {"kind": "mock"}, "created_at": utc_now()}
    store.put_session(session)
    session["turns"] = [{"role": "user", "text": "hi", "timestamp": utc_now()}]
    store.put_session(session)
    got = store.get_session(session["id"])
    assert len(got["turns"]) == 1


def test_ping(store):
    assert store.ping() is True


# --- embedded specifics ------------------------------------------------------

def test_embedded_segment_header_and_reopen(tmp_path):
    root = str(tmp_path / "seg")
    store = EmbeddedStore(root)
    store.ensure_indices()
    ids = [store.index_original(FLOW, "b") for _ in range(5)]
    path = os.path.join(root, "original-packets.jsonl")
    with open(path) as fh:
        header = json.loads(fh.readline())
    assert header == {"format": "hunt-jsonl", "version": 1}

    reopened = EmbeddedStore(root)
    reopened.ensure_indices()
    for doc_id in ids:
        assert reopened.get_original(doc_id).id == doc_id
    assert reopened.count("original-packets") == 5


def test_embedded_rejects_foreign_file(tmp_path):
    root = str(tmp_path / "seg")
    os.makedirs(root)
    with open(os.path.join(root, "original-packets.jsonl"), "w") as fh:
        fh.write('{"something": "else"}\n')
    store = EmbeddedStore(root)
    with pytest.raises(MappingConflict):
        store.ensure_indices()


def test_embedded_duplicate_id_write_conflict(tmp_path):
    store = EmbeddedStore(str(tmp_path / "seg"))
    store.ensure_indices()
    original_id = store.index_original(FLOW, "b")
    det = make_detected(original_id)
    store.index_detected(det)
    with pytest.raises(WriteConflict):
        store.index_detected(det)


def test_embedded_concurrent_writes_all_durable(tmp_path):
    """1,000 interleaved writes from 8 threads: no losses, no duplicates."""
    root = str(tmp_path / "seg")
    store = EmbeddedStore(root)
    store.ensure_indices()
    ids, errors = [], []
    lock = threading.Lock()

    def writer(n):
        try:
            got = [store.index_original(FLOW, f"batch-{n}") for _ in range(125)]
            with lock:
                ids.extend(got)
        except Exception as e:  # pragma: no cover
            errors.append(e)

    threads = [threading.Thread(target=writer, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert len(ids) == 1000
    assert len(set(ids)) == 1000
    reopened = EmbeddedStore(root)
    reopened.ensure_indices()
    assert reopened.count("original-packets") == 1000
    for doc_id in ids[::97]:
        assert reopened.get_original(doc_id).id == doc_id


# --- elasticsearch client specifics -----------------------------------------

def test_elastic_auth_failure(monkeypatch):
    config = StoreConfig(backend="elasticsearch", endpoint="http://fake")
    monkeypatch.setenv("HUNT_ES_API_KEY", "wrong")
    store = ElasticStore(config, session=FakeElasticSession(require_key="right"))
    with pytest.raises(AuthFailed):
        store.ensure_indices()
    monkeypatch.setenv("HUNT_ES_API_KEY", "right")
    store.ensure_indices()


def test_elastic_unreachable(tmp_path):
    config = StoreConfig(backend="elasticsearch", endpoint="http://fake")
    store = ElasticStore(config, session=ExplodingSession())
    with pytest.raises(Unreachable):
        store.ensure_indices()
    assert store.ping() is False


def test_elastic_mapping_conflict():
    session = FakeElasticSession()
    config = StoreConfig(backend="elasticsearch", endpoint="http://fake")
    store = ElasticStore(config, session=session)
    store.ensure_indices()
    # corrupt one field type in the existing index
    mapping = session.indices["detected-packets"]["mapping"]
    mapping["mappings"]["properties"]["detected_at"] = {"type": "keyword"}
    with pytest.raises(MappingConflict):
        store.ensure_indices()


def test_committed_mappings_cover_document_fields():
    mappings = load_mappings()
    detected = mappings["detected-packets"]["mappings"]["properties"]
    for field in ("id", "prediction", "factors", "exp_img", "shap_img",
                  "original_data", "detected_at", "model_version"):
        assert field in detected
    original = mappings["original-packets"]["mappings"]["properties"]
    assert len(original["features"]["properties"]) == 41


# --- artifact stores ---------------------------------------------------------

def test_localdir_content_addressing(tmp_path):
    art = LocalDirArtifactStore(str(tmp_path))
    uri = art.put_artifact(b"<svg>x</svg>", "image/svg+xml")
    assert uri.startswith("file://")
    assert re.search(r"plots/[0-9a-f]{64}\.svg$", uri)
    assert art.put_artifact(b"<svg>x</svg>", "image/svg+xml") == uri
    assert art.get_artifact(uri) == b"<svg>x</svg>"
    assert art.exists(uri)
    assert not art.exists(uri[:-5] + "0.svg")


def test_localdir_integrity_check(tmp_path):
    art = LocalDirArtifactStore(str(tmp_path))
    uri = art.put_artifact(b"payload", "application/json")
    path = urlparse(uri).path
    with open(path, "wb") as fh:
        fh.write(b"tampered")
    with pytest.raises(IntegrityError):
        art.get_artifact(uri)


def test_localdir_missing_artifact(tmp_path):
    art = LocalDirArtifactStore(str(tmp_path))
    with pytest.raises(NotFound):
        art.get_artifact("file:///nope/plots/" + "0" * 64 + ".svg")


def test_empty_artifact_rejected(tmp_path):
    art = LocalDirArtifactStore(str(tmp_path))
    with pytest.raises(ValueError):
        art.put_artifact(b"", "image/svg+xml")


# --- ids, config, credential handling ---------------------------------------

def test_ulids_unique_sortable_crockford():
    ids = [new_ulid() for _ in range(2000)]
    assert len(set(ids)) == 2000
    for u in ids[:50]:
        assert len(u) == 26
        assert re.fullmatch(r"[0-9ABCDEFGHJKMNPQRSTVWXYZ]{26}", u)


def test_open_store_factories(tmp_path):
    config = StoreConfig(backend="embedded", root=str(tmp_path / "s"),
                         object_store={"backend": "localdir",
                                       "root": str(tmp_path / "a")})
    assert isinstance(open_store(config), EmbeddedStore)
    assert isinstance(open_artifact_store(config), LocalDirArtifactStore)
    with pytest.raises(ValueError):
        open_store(StoreConfig(backend="bogus"))


def test_credentials_never_serialized(monkeypatch):
    """Configs reference credentials by env var name; values never leak."""
    secret = "super-secret-api-key-value"
    monkeypatch.setenv("HUNT_ES_API_KEY", secret)
    monkeypatch.setenv("HUNT_S3_SECRET", secret)
    config = StoreConfig(backend="elasticsearch", endpoint="http://es:9200")
    dumped = json.dumps(config.to_json())
    assert secret not in dumped
    assert "HUNT_ES_API_KEY" in dumped

    from hunt.assistant import TransportConfig
    monkeypatch.setenv("HUNT_LLM_API_KEY", secret)
    snap = json.dumps(TransportConfig(kind="live").snapshot())
    assert secret not in snap
    assert "api_key" not in snap


def test_utc_now_format():
    stamp = utc_now()
    assert re.fullmatch(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\.\d{3}Z", stamp)
