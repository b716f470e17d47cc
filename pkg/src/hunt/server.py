"""Detection pipeline orchestration and the HTTP API.

The pipeline persists every ingested flow as an original-packet document
and, for anomalous verdicts only, a detected-packet document with its
explanation artifacts. Explainer failures degrade the detection record
(explanation_error set, no factors); store failures reject the flow.
"""

from __future__ import annotations

import hmac
import os
import time

from fastapi import Depends, FastAPI, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .assistant import AssistantService, generate_report
from .bundles import ExplanationBundle, compose_bundle
from .dataset import FEATURE_NAMES, NetworkFlow, parse_kdd_csv
from .errors import (ArtifactMissing, AuthFailed, BadFilter, ContextOverflow,
                     FixtureMiss, ForeignKeyMissing, HuntError, NotFound,
                     ParseError, SessionNotFound, StoreUnavailable,
                     TransportError, Unreachable, UnknownToken, WrongArity)
from .forest import Prediction, RandomForestModel
from .lime import LimeConfig
from .stores import DetectedPacketDoc, new_ulid, utc_now

_STATUS_FOR = (
    ((NotFound, SessionNotFound, ArtifactMissing), 404),
    ((BadFilter, ParseError, WrongArity, UnknownToken, ValueError), 400),
    ((AuthFailed,), 401),
    ((Unreachable, StoreUnavailable, TransportError, FixtureMiss,
      ContextOverflow), 503),
)


def _status_for(exc: Exception) -> int:
    for classes, status in _STATUS_FOR:
        if isinstance(exc, classes):
            return status
    return 500


def _error_body(exc: Exception) -> dict:
    code = getattr(exc, "code", exc.__class__.__name__)
    return {"error": {"code": code, "message": str(exc)}}


class Pipeline:
    """index original -> predict -> explain -> persist detection."""

    def __init__(self, model: RandomForestModel, store, artifact_store,
                 lime_config: LimeConfig = LimeConfig(), clock=utc_now,
                 explainer=compose_bundle):
        self.model = model
        self.store = store
        self.artifact_store = artifact_store
        self.lime_config = lime_config
        self.clock = clock
        self.explainer = explainer  # injectable for fault testing

    def _factors(self, bundle: ExplanationBundle) -> tuple:
        factors = []
        for factor, text in zip(bundle.lime.factors, bundle.factor_text):
            factors.append({"source": "lime", "feature": factor.feature,
                            "condition": factor.condition,
                            "weight": factor.weight,
                            "direction": factor.direction,
                            "description": text})
        for name, value in bundle.shap.top_features:
            direction = "supports" if value >= 0 else "opposes"
            factors.append({
                "source": "shap", "feature": name, "condition": "",
                "weight": value, "direction": direction,
                "description": (f"{name} contributes {value:+.6f} "
                                f"({direction}) to class "
                                f"'{bundle.shap.predicted_class}'")})
        return tuple(factors)

    def explain(self, flow: NetworkFlow,
                prediction: Prediction) -> ExplanationBundle:
        return self.explainer(self.model, flow, prediction, self.lime_config)

    def process_flow(self, flow: NetworkFlow, batch: str = "") -> dict:
        stages = [{"stage": "ingest", "at": self.clock()}]
        original_id = self.store.index_original(flow, batch)
        stages.append({"stage": "persist_original", "at": self.clock()})
        prediction = self.model.predict(flow)
        stages.append({"stage": "predict", "at": self.clock()})

        detection_id = None
        explanation_error = None
        if prediction.is_anomalous:
            factors, exp_img, shap_img = (), "", ""
            try:
                bundle = self.explain(flow, prediction)
                shap_img = self.artifact_store.put_artifact(
                    bundle.shap_plot.svg, "image/svg+xml")
                exp_img = self.artifact_store.put_artifact(
                    bundle.lime_plot.svg, "image/svg+xml")
                factors = self._factors(bundle)
            except Exception as e:  # degrade, never drop the detection
                explanation_error = f"{e.__class__.__name__}: {e}"
                factors, exp_img, shap_img = (), "", ""
            stages.append({"stage": "explain", "at": self.clock()})
            doc = DetectedPacketDoc(
                id=new_ulid(), prediction=prediction.to_json(),
                factors=factors, exp_img=exp_img, shap_img=shap_img,
                original_data=original_id, detected_at=self.clock(),
                model_version=self.model.model_version,
                explanation_error=explanation_error)
            detection_id = self.store.index_detected(doc)
            stages.append({"stage": "persist_detected", "at": self.clock()})

        return {
            "original_id": original_id,
            "detection_id": detection_id,
            "prediction": prediction.to_json(),
            "explanation_error": explanation_error,
            "stages": stages,
        }

    def process_many(self, flows, batch: str = "") -> list:
        return [self.process_flow(flow, batch) for flow in flows]


def _parse_flow(obj: dict) -> NetworkFlow:
    missing = [n for n in FEATURE_NAMES if n not in obj]
    if missing:
        raise ParseError(0, missing[0], f"missing feature field {missing[0]!r}")
    line = ",".join(str(obj[n]) for n in FEATURE_NAMES)
    label = obj.get("label")
    if label:
        line += f",{label}"
    parsed = parse_kdd_csv([line])
    rows = parsed.rows if hasattr(parsed, "rows") else parsed
    return rows[0]


def create_app(pipeline: Pipeline, assistant: AssistantService | None = None,
               token_env: str = "HUNT_API_TOKEN", ui_dir: str = "",
               health_ttl: float = 5.0) -> FastAPI:
    app = FastAPI(title="hunt-console", docs_url=None, redoc_url=None)
    health_cache = {"at": 0.0, "body": None}

    def require_auth(request: Request):
        expected = os.environ.get(token_env, "")
        if not expected:
            return  # auth disabled when no token is configured
        header = request.headers.get("authorization", "")
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not hmac.compare_digest(token, expected):
            raise AuthFailed("missing or invalid bearer token")

    @app.exception_handler(Exception)
    async def handle_any(request: Request, exc: Exception):
        return JSONResponse(_error_body(exc), status_code=_status_for(exc))

    @app.exception_handler(HuntError)
    async def handle_hunt(request: Request, exc: HuntError):
        return JSONResponse(_error_body(exc), status_code=_status_for(exc))

    @app.middleware("http")
    async def request_id(request: Request, call_next):
        rid = request.headers.get("x-request-id") or new_ulid()
        response = await call_next(request)
        response.headers["X-Request-Id"] = rid
        return response

    api = "/api/v1"

    @app.post(api + "/detect", dependencies=[Depends(require_auth)])
    async def detect(request: Request):
        body = await request.json()
        if isinstance(body, list):
            flows_in, batch = body, ""
        else:
            flows_in = body.get("flows", [])
            batch = body.get("batch", "")
        if not flows_in:
            raise BadFilter("request contains no flows")
        flows = [_parse_flow(obj) for obj in flows_in]
        events = pipeline.process_many(flows, batch or new_ulid())
        return {"events": events}

    @app.get(api + "/detections", dependencies=[Depends(require_auth)])
    def list_detections(request: Request):
        filters = {}
        params = request.query_params
        allowed = {"is_anomalous", "class", "from", "to", "page", "page_size"}
        for key in params:
            if key not in allowed:
                raise BadFilter(f"unknown filter keys: ['{key}']")
        if "is_anomalous" in params:
            raw = params["is_anomalous"].lower()
            if raw not in ("true", "false"):
                raise BadFilter("is_anomalous must be a boolean")
            filters["is_anomalous"] = raw == "true"
        for key in ("class", "from", "to"):
            if key in params:
                filters[key] = params[key]
        for key in ("page", "page_size"):
            if key in params:
                try:
                    filters[key] = int(params[key])
                except ValueError:
                    raise BadFilter(f"{key} must be an integer") from None
        return pipeline.store.query_detected(filters).to_json()

    @app.get(api + "/detections/{det_id}", dependencies=[Depends(require_auth)])
    def get_detection(det_id: str):
        return pipeline.store.get_detected(det_id).to_json()

    @app.get(api + "/detections/{det_id}/original",
             dependencies=[Depends(require_auth)])
    def get_original(det_id: str):
        doc = pipeline.store.get_detected(det_id)
        return pipeline.store.get_original(doc.original_data).to_json()

    @app.get(api + "/detections/{det_id}/explanation",
             dependencies=[Depends(require_auth)])
    def get_explanation(det_id: str):
        doc = pipeline.store.get_detected(det_id)
        original = pipeline.store.get_original(doc.original_data)
        flow = original.to_flow()
        prediction = pipeline.model.predict(flow)
        bundle = pipeline.explain(flow, prediction)
        return bundle.to_json()

    @app.get(api + "/detections/{det_id}/plots/{which}",
             dependencies=[Depends(require_auth)])
    def get_plot(det_id: str, which: str):
        doc = pipeline.store.get_detected(det_id)
        if which == "shap":
            uri = doc.shap_img
        elif which == "lime":
            uri = doc.exp_img
        else:
            raise NotFound(f"unknown plot kind {which!r}")
        if not uri:
            raise ArtifactMissing(f"no {which} plot recorded for {det_id}")
        data = pipeline.artifact_store.get_artifact(uri)
        return Response(content=data, media_type="image/svg+xml")

    @app.post(api + "/detections/{det_id}/analyze",
              dependencies=[Depends(require_auth)])
    def analyze(det_id: str):
        if assistant is None:
            raise StoreUnavailable("assistant is disabled")
        doc = pipeline.store.get_detected(det_id)
        original = pipeline.store.get_original(doc.original_data)
        analysis, session = assistant.analyze_detection(doc, original)
        return {"analysis": analysis, "session_id": session.id,
                "detection_id": det_id}

    @app.get(api + "/sessions/{session_id}",
             dependencies=[Depends(require_auth)])
    def get_session(session_id: str):
        if assistant is None:
            raise StoreUnavailable("assistant is disabled")
        return assistant.load_session(session_id).to_json()

    @app.post(api + "/sessions/{session_id}/chat",
              dependencies=[Depends(require_auth)])
    async def chat(session_id: str, request: Request):
        if assistant is None:
            raise StoreUnavailable("assistant is disabled")
        body = await request.json()
        message = (body or {}).get("message", "").strip()
        if not message:
            raise BadFilter("chat message must be non-empty")
        session = assistant.load_session(session_id)
        reply = assistant.chat_turn(session, message)
        return {"reply": reply, "session_id": session_id}

    @app.get(api + "/detections/{det_id}/report",
             dependencies=[Depends(require_auth)])
    def report(det_id: str, format: str = "html", session_id: str = ""):
        session = assistant.load_session(session_id) \
            if (assistant is not None and session_id) else None
        doc = generate_report(det_id, pipeline.store, pipeline.artifact_store,
                              session=session)
        if format == "json":
            return JSONResponse(doc.sidecar)
        return HTMLResponse(doc.html)

    @app.get("/healthz")
    def healthz():
        now = time.monotonic()
        if health_cache["body"] and now - health_cache["at"] < health_ttl:
            return health_cache["body"]
        store_ok = False
        try:
            store_ok = pipeline.store.ping()
        except Exception:
            store_ok = False
        if assistant is None:
            llm = "disabled"
        else:
            llm = "ok" if assistant.transport is not None else "down"
        body = {
            "status": "ok" if store_ok else "degraded",
            "model_version": pipeline.model.model_version,
            "store": "ok" if store_ok else "down",
            "llm": llm,
        }
        health_cache["at"] = now
        health_cache["body"] = body
        return body

    if ui_dir and os.path.isdir(ui_dir):
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
