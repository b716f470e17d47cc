"""Pipeline configuration: INI-style config file with env var overrides."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .assistant import DEFAULT_CONTEXT_BUDGET, TransportConfig
from .lime import LimeConfig
from .stores import StoreConfig

ENV_OVERRIDES = {
    ("store", "endpoint"): "HUNT_ES_URL",
    ("objects", "endpoint"): "HUNT_S3_ENDPOINT",
    ("objects", "bucket"): "HUNT_S3_BUCKET",
}


@dataclass
class PipelineConfig:
    model_path: str = ""
    store: StoreConfig = field(default_factory=StoreConfig)
    lime: LimeConfig = field(default_factory=LimeConfig)
    transport: TransportConfig | None = None
    assistant_budget: int = DEFAULT_CONTEXT_BUDGET
    listen_addr: str = "127.0.0.1:8787"
    api_token_env: str = "HUNT_API_TOKEN"


def _get(parser, section, key, fallback=None):
    env = ENV_OVERRIDES.get((section, key))
    if env and os.environ.get(env):
        return os.environ[env]
    return parser.get(section, key, fallback=fallback)


def load_config(path: str) -> PipelineConfig:
    parser = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_string(fh.read())

    cfg = PipelineConfig()
    cfg.model_path = _get(parser, "model", "path", cfg.model_path)
    cfg.listen_addr = _get(parser, "server", "listen", cfg.listen_addr)
    cfg.api_token_env = _get(parser, "server", "api_token_env", cfg.api_token_env)

    cfg.store = StoreConfig(
        backend=_get(parser, "store", "backend", "embedded"),
        root=_get(parser, "store", "root", ""),
        endpoint=_get(parser, "store", "endpoint", ""),
        api_key_env=_get(parser, "store", "api_key_env", "HUNT_ES_API_KEY"),
        detected_index=_get(parser, "store", "detected_index", "detected-packets"),
        original_index=_get(parser, "store", "original_index", "original-packets"),
        sessions_index=_get(parser, "store", "sessions_index", "chat-sessions"),
        object_store={
            "backend": _get(parser, "objects", "backend", "localdir"),
            "root": _get(parser, "objects", "root", ""),
            "endpoint": _get(parser, "objects", "endpoint", ""),
            "bucket": _get(parser, "objects", "bucket", ""),
        },
    )
    if parser.has_section("explainer"):
        cfg.lime = LimeConfig(
            n_samples=parser.getint("explainer", "n_samples",
                                    fallback=LimeConfig.n_samples),
            kernel_width=parser.getfloat("explainer", "kernel_width",
                                         fallback=LimeConfig.kernel_width),
            top_k=parser.getint("explainer", "top_k", fallback=LimeConfig.top_k),
            ridge_alpha=parser.getfloat("explainer", "ridge_alpha",
                                        fallback=LimeConfig.ridge_alpha),
            seed=parser.getint("explainer", "seed", fallback=LimeConfig.seed),
        )
    kind = _get(parser, "assistant", "kind", "")
    if kind:
        cfg.transport = TransportConfig(
            kind=kind,
            endpoint=_get(parser, "assistant", "endpoint",
                          TransportConfig.endpoint),
            model=_get(parser, "assistant", "model", TransportConfig.model),
            temperature=float(_get(parser, "assistant", "temperature",
                                   TransportConfig.temperature)),
            api_key_env=_get(parser, "assistant", "api_key_env",
                             TransportConfig.api_key_env),
            fixture_path=_get(parser, "assistant", "fixture_path", ""),
        )
        cfg.assistant_budget = int(_get(parser, "assistant", "budget",
                                        DEFAULT_CONTEXT_BUDGET))
    return cfg
