"""Content-addressed artifact stores: local directory and S3-compatible.

Both backends expose put/get/exists over URIs of the form
``<scheme>://.../plots/{sha256}.{ext}``; reads re-hash the payload and fail
with IntegrityError when the object was tampered with.
"""

from __future__ import annotations

import hashlib
import hmac
import os
from datetime import datetime, timezone
from urllib.parse import urlparse

import requests

from ..errors import IntegrityError, NotFound, Unreachable

_EXT = {"image/svg+xml": "svg", "image/png": "png", "text/html": "html",
        "application/json": "json"}


def _key_for(data: bytes, content_type: str) -> str:
    ext = _EXT.get(content_type, "bin")
    return f"plots/{hashlib.sha256(data).hexdigest()}.{ext}"


def _verify(uri: str, data: bytes) -> bytes:
    name = uri.rsplit("/", 1)[-1]
    digest = name.split(".", 1)[0]
    if hashlib.sha256(data).hexdigest() != digest:
        raise IntegrityError(f"artifact {uri} does not match its digest")
    return data


class LocalDirArtifactStore:
    scheme = "file"

    def __init__(self, root: str):
        self.root = os.path.abspath(root)
        os.makedirs(os.path.join(self.root, "plots"), exist_ok=True)

    def put_artifact(self, data: bytes, content_type: str) -> str:
        if not data:
            raise ValueError("artifact bytes must be non-empty")
        key = _key_for(data, content_type)
        path = os.path.join(self.root, key)
        if not os.path.exists(path):  # content addressing deduplicates
            tmp = path + ".tmp"
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        return f"file://{path}"

    def _path(self, uri: str) -> str:
        parsed = urlparse(uri)
        if parsed.scheme != "file":
            raise NotFound(f"not a local artifact URI: {uri}")
        return parsed.path

    def get_artifact(self, uri: str) -> bytes:
        path = self._path(uri)
        try:
            with open(path, "rb") as fh:
                return _verify(uri, fh.read())
        except FileNotFoundError:
            raise NotFound(f"artifact {uri} not found") from None

    def exists(self, uri: str) -> bool:
        try:
            return os.path.exists(self._path(uri))
        except NotFound:
            return False


class S3CompatArtifactStore:
    """Minimal S3 REST client (SigV4) for any S3-compatible endpoint."""

    scheme = "s3"

    def __init__(self, endpoint: str, bucket: str,
                 key_id_env: str = "HUNT_S3_KEY_ID",
                 secret_env: str = "HUNT_S3_SECRET", region: str = "us-east-1",
                 session: requests.Session | None = None):
        self.endpoint = endpoint.rstrip("/")
        self.bucket = bucket
        self.key_id_env = key_id_env
        self.secret_env = secret_env
        self.region = region
        self.session = session or requests.Session()

    def _creds(self):
        return os.environ.get(self.key_id_env, ""), os.environ.get(self.secret_env, "")

    def _sign(self, method: str, path: str, payload: bytes, headers: dict):
        key_id, secret = self._creds()
        now = datetime.now(timezone.utc)
        amz_date = now.strftime("%Y%m%dT%H%M%SZ")
        datestamp = now.strftime("%Y%m%d")
        host = urlparse(self.endpoint).netloc
        payload_hash = hashlib.sha256(payload).hexdigest()
        headers.update({"host": host, "x-amz-date": amz_date,
                        "x-amz-content-sha256": payload_hash})
        signed = ";".join(sorted(headers))
        canonical = "\n".join([
            method, path, "",
            "".join(f"{k}:{headers[k]}\n" for k in sorted(headers)),
            signed, payload_hash])
        scope = f"{datestamp}/{self.region}/s3/aws4_request"
        to_sign = "\n".join(["AWS4-HMAC-SHA256", amz_date, scope,
                             hashlib.sha256(canonical.encode()).hexdigest()])

        def _hmac(key, msg):
            return hmac.new(key, msg.encode(), hashlib.sha256).digest()

        k = _hmac(_hmac(_hmac(_hmac(("AWS4" + secret).encode(), datestamp),
                              self.region), "s3"), "aws4_request")
        signature = hmac.new(k, to_sign.encode(), hashlib.sha256).hexdigest()
        headers["Authorization"] = (
            f"AWS4-HMAC-SHA256 Credential={key_id}/{scope}, "
            f"SignedHeaders={signed}, Signature={signature}")
        return headers

    def _request(self, method: str, key: str, payload: bytes = b"",
                 content_type: str | None = None):
        path = f"/{self.bucket}/{key}"
        headers = {}
        if content_type:
            headers["content-type"] = content_type
        headers = self._sign(method, path, payload, headers)
        try:
            return self.session.request(method, self.endpoint + path,
                                        data=payload or None, headers=headers,
                                        timeout=10)
        except requests.RequestException as e:
            raise Unreachable(f"object store unreachable: {e}") from None

    def put_artifact(self, data: bytes, content_type: str) -> str:
        if not data:
            raise ValueError("artifact bytes must be non-empty")
        key = _key_for(data, content_type)
        resp = self._request("PUT", key, data, content_type)
        if resp.status_code not in (200, 201):
            raise Unreachable(f"object store PUT failed: {resp.status_code}")
        return f"s3://{self.bucket}/{key}"

    def _key(self, uri: str) -> str:
        parsed = urlparse(uri)
        if parsed.scheme != "s3" or parsed.netloc != self.bucket:
            raise NotFound(f"URI {uri} is not in bucket {self.bucket}")
        return parsed.path.lstrip("/")

    def get_artifact(self, uri: str) -> bytes:
        resp = self._request("GET", self._key(uri))
        if resp.status_code == 404:
            raise NotFound(f"artifact {uri} not found")
        if resp.status_code != 200:
            raise Unreachable(f"object store GET failed: {resp.status_code}")
        return _verify(uri, resp.content)

    def exists(self, uri: str) -> bool:
        try:
            resp = self._request("HEAD", self._key(uri))
        except (NotFound, Unreachable):
            return False
        return resp.status_code == 200
