"""Command line interface.

Machine-readable results are emitted as JSON lines on stdout; diagnostics
go to stderr. Exit codes: 0 success, 1 operational failure, 2 usage error.
"""

from __future__ import annotations

import json
import sys

import click

from . import readability as rd
from .assistant import AssistantService, generate_report, open_transport
from .config import load_config
from .dataset import parse_kdd_csv
from .errors import HuntError
from .exams import ExamFixture, run_exam
from .forest import Hyperparameters, load as load_model, save as save_model, train
from .lime import LimeConfig
from .server import Pipeline, create_app
from .stores import open_artifact_store, open_store


def _emit(obj):
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _diag(msg):
    click.echo(msg, err=True)


def _fail(e: Exception):
    code = getattr(e, "code", e.__class__.__name__)
    _diag(f"error [{code}]: {e}")
    sys.exit(1)


@click.group()
def main():
    """Explainable intrusion detection console."""


@main.command("train")
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Labeled KDD99-format CSV.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Where to write the serialized model.")
@click.option("--n-trees", default=100, show_default=True)
@click.option("--max-depth", default=None, type=int)
@click.option("--min-samples-leaf", default=1, show_default=True)
@click.option("--features-per-split", default=6, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--test-fraction", default=0.0, show_default=True,
              help="Held-out fraction reported after training (0 = none).")
def train_cmd(data_path, out_path, n_trees, max_depth, min_samples_leaf,
              features_per_split, seed, test_fraction):
    """Train a random forest on a labeled capture."""
    try:
        with open(data_path, "r", encoding="utf-8") as fh:
            data = parse_kdd_csv(fh)
        if not hasattr(data, "rows"):
            raise HuntError("training data must be fully labeled")
        hp = Hyperparameters(n_trees=n_trees, max_depth=max_depth,
                             min_samples_leaf=min_samples_leaf,
                             features_per_split=features_per_split, seed=seed)
        if test_fraction > 0:
            from .dataset import split
            train_set, test_set = split(data, test_fraction, seed)
        else:
            train_set, test_set = data, None
        model, report = train(train_set, hp)
        with open(out_path, "wb") as fh:
            fh.write(save_model(model))
        if test_set is not None:
            from .dataset import encode_dataset
            import numpy as np
            Xt, yt = encode_dataset(test_set, model.schema)
            pred = np.argmax(model.predict_proba_encoded(Xt), axis=1)
            report["held_out_accuracy"] = float((pred == yt).mean())
        report["model_path"] = out_path
        _emit(report)
    except HuntError as e:
        _fail(e)


@main.command("detect")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="KDD99-format CSV of flows to score.")
@click.option("--store-root", default="", type=click.Path(),
              help="Persist originals/detections under this directory.")
@click.option("--batch", default="cli", show_default=True)
@click.option("--no-explain", is_flag=True,
              help="Skip explanation bundles (verdicts only).")
@click.option("--lime-samples", default=5000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def detect_cmd(model_path, data_path, store_root, batch, no_explain,
               lime_samples, seed):
    """Score flows; one JSON line per flow on stdout."""
    try:
        with open(model_path, "rb") as fh:
            model = load_model(fh)
        with open(data_path, "r", encoding="utf-8") as fh:
            parsed = parse_kdd_csv(fh)
        flows = parsed.rows if hasattr(parsed, "rows") else parsed
        lime_config = LimeConfig(n_samples=lime_samples, seed=seed)
        if store_root:
            from .stores import EmbeddedStore, LocalDirArtifactStore
            import os
            artifacts = LocalDirArtifactStore(os.path.join(store_root, "artifacts"))
            store = EmbeddedStore(store_root, artifact_store=artifacts)
            store.ensure_indices()
            pipeline = Pipeline(model, store, artifacts, lime_config)
            if no_explain:
                pipeline.explainer = _no_explainer
            for event in pipeline.process_many(flows, batch):
                _emit(event)
        else:
            for flow in flows:
                _emit(model.predict(flow).to_json())
    except HuntError as e:
        _fail(e)


def _no_explainer(model, flow, prediction, lime_config):
    raise HuntError("explanations disabled by --no-explain")


@main.command("serve")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
def serve_cmd(config_path):
    """Run the HTTP API server."""
    try:
        import uvicorn

        cfg = load_config(config_path)
        with open(cfg.model_path, "rb") as fh:
            model = load_model(fh)
        artifacts = open_artifact_store(cfg.store)
        store = open_store(cfg.store, artifact_store=artifacts)
        store.ensure_indices()
        pipeline = Pipeline(model, store, artifacts, cfg.lime)
        assistant = None
        if cfg.transport is not None:
            assistant = AssistantService(open_transport(cfg.transport),
                                         store=store,
                                         budget=cfg.assistant_budget)
        app = create_app(pipeline, assistant, token_env=cfg.api_token_env)
        host, _, port = cfg.listen_addr.partition(":")
        _diag(f"listening on {cfg.listen_addr}")
        uvicorn.run(app, host=host, port=int(port or 8787), log_level="warning")
    except HuntError as e:
        _fail(e)


@main.group("eval")
def eval_group():
    """Evaluation harnesses."""


@eval_group.command("readability")
@click.option("--text", "text_path", type=click.Path(exists=True, dir_okay=False),
              help="Score a single text file.")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True, file_okay=False),
              help="Score every *.txt file in a directory.")
def eval_readability(text_path, corpus_dir):
    """Readability metrics for a text or a corpus."""
    if bool(text_path) == bool(corpus_dir):
        raise click.UsageError("provide exactly one of --text or --corpus")
    try:
        if text_path:
            with open(text_path, "r", encoding="utf-8") as fh:
                _emit(rd.report(fh.read()))
        else:
            import glob
            import os
            names, texts = [], []
            for path in sorted(glob.glob(os.path.join(corpus_dir, "*.txt"))):
                with open(path, "r", encoding="utf-8") as fh:
                    names.append(os.path.basename(path))
                    texts.append(fh.read())
            out = rd.score_corpus(texts)
            out["files"] = names
            _emit(out)
    except HuntError as e:
        _fail(e)


@eval_group.command("exam")
@click.option("--fixture", "fixture_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--transport", "kind", default="mock", show_default=True,
              type=click.Choice(["live", "mock", "replay"]))
@click.option("--replay-fixture", default="", type=click.Path(),
              help="Recorded responses (required for --transport replay).")
@click.option("--strict-total", is_flag=True,
              help="Count errored questions in the denominator.")
def eval_exam(fixture_path, kind, replay_fixture, strict_total):
    """Grade an LLM transport on a multiple-choice exam fixture."""
    try:
        from .assistant import TransportConfig

        fixture = ExamFixture.load(fixture_path)
        config = TransportConfig(kind=kind, fixture_path=replay_fixture)
        transport = open_transport(config)
        result = run_exam(fixture, transport, strict_total=strict_total)
        _emit(result)
    except HuntError as e:
        _fail(e)


@main.command("report")
@click.option("--store-root", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--detection", "det_id", required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--session", "session_id", default="")
def report_cmd(store_root, det_id, out_path, session_id):
    """Write a self-contained HTML incident report (plus JSON sidecar)."""
    try:
        import os

        from .assistant import ChatSession
        from .stores import EmbeddedStore, LocalDirArtifactStore

        artifacts_root = os.path.join(store_root, "artifacts")
        artifacts = LocalDirArtifactStore(artifacts_root) \
            if os.path.isdir(artifacts_root) else None
        store = EmbeddedStore(store_root, artifact_store=artifacts)
        store.ensure_indices()
        session = ChatSession.from_json(store.get_session(session_id)) \
            if session_id else None
        doc = generate_report(det_id, store, artifacts, session=session)
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(doc.html)
        sidecar_path = out_path + ".json"
        with open(sidecar_path, "w", encoding="utf-8") as fh:
            json.dump(doc.sidecar, fh, sort_keys=True, indent=2)
        _emit({"report": out_path, "sidecar": sidecar_path,
               "warnings": doc.warnings})
    except HuntError as e:
        _fail(e)


if __name__ == "__main__":
    main()
