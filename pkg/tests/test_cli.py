import json
import os

import pytest
from click.testing import CliRunner

from hunt.cli import main
from hunt.config import load_config


@pytest.fixture(scope="module")
def runner():
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()


@pytest.fixture(scope="module")
def small_csv(fixtures_dir, tmp_path_factory):
    src = os.path.join(fixtures_dir, "kdd_sample.csv")
    dst = tmp_path_factory.mktemp("data") / "small.csv"
    with open(src, "r", encoding="utf-8") as fh:
        lines = [next(fh) for _ in range(600)]
    dst.write_text("".join(lines))
    return str(dst)


@pytest.fixture(scope="module")
def trained(runner, small_csv, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("model") / "model.json")
    result = runner.invoke(main, ["train", "--data", small_csv, "--out", out,
                                  "--n-trees", "4", "--max-depth", "5",
                                  "--seed", "3", "--test-fraction", "0.2"])
    assert result.exit_code == 0, result.output
    return out, result


def stdout_lines(result):
    text = getattr(result, "stdout", result.output)
    return [json.loads(line) for line in text.splitlines()
            if line.startswith("{")]


def test_train_reports_metrics(trained):
    out, result = trained
    assert os.path.exists(out)
    (report,) = stdout_lines(result)
    assert report["model_path"] == out
    assert report["n_trees"] == 4
    assert 0.0 <= report["held_out_accuracy"] <= 1.0
    assert len(report["model_version"]) == 12


def test_detect_emits_one_json_line_per_flow(runner, trained, small_csv):
    model_path, _ = trained
    result = runner.invoke(main, ["detect", "--model", model_path,
                                  "--data", small_csv])
    assert result.exit_code == 0, result.output
    lines = stdout_lines(result)
    assert len(lines) == 600
    for line in lines[:5]:
        assert set(line) >= {"label", "genre", "is_anomalous",
                             "probabilities"}


def test_detect_stdout_is_deterministic(runner, trained, small_csv):
    model_path, _ = trained
    args = ["detect", "--model", model_path, "--data", small_csv]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.exit_code == second.exit_code == 0
    assert getattr(first, "stdout", first.output) == \
        getattr(second, "stdout", second.output)


def test_detect_with_store_persists_and_report_renders(runner, trained,
                                                       small_csv, tmp_path):
    model_path, _ = trained
    store_root = str(tmp_path / "store")
    result = runner.invoke(main, ["detect", "--model", model_path,
                                  "--data", small_csv,
                                  "--store-root", store_root,
                                  "--lime-samples", "100"])
    assert result.exit_code == 0, result.output
    events = stdout_lines(result)
    assert len(events) == 600
    detected = [e for e in events if e["detection_id"]]
    assert detected, "expected at least one anomalous flow"

    out = str(tmp_path / "incident.html")
    result = runner.invoke(main, ["report", "--store-root", store_root,
                                  "--detection", detected[0]["detection_id"],
                                  "--out", out])
    assert result.exit_code == 0, result.output
    (summary,) = stdout_lines(result)
    assert summary["warnings"] == 0
    with open(out, "r", encoding="utf-8") as fh:
        assert fh.read().startswith("<!DOCTYPE html>")
    with open(out + ".json", "r", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    assert sidecar["detection"]["id"] == detected[0]["detection_id"]


def test_detect_no_explain_degrades(runner, trained, small_csv, tmp_path):
    model_path, _ = trained
    store_root = str(tmp_path / "store")
    result = runner.invoke(main, ["detect", "--model", model_path,
                                  "--data", small_csv,
                                  "--store-root", store_root, "--no-explain"])
    assert result.exit_code == 0, result.output
    detected = [e for e in stdout_lines(result) if e["detection_id"]]
    assert detected
    for event in detected:
        assert "disabled" in event["explanation_error"]


def test_usage_errors_exit_2(runner, trained):
    model_path, _ = trained
    assert runner.invoke(main, ["train"]).exit_code == 2
    assert runner.invoke(main, ["detect", "--model", model_path]).exit_code == 2
    assert runner.invoke(main, ["eval", "readability"]).exit_code == 2
    assert runner.invoke(main, ["no-such-command"]).exit_code == 2


def test_operational_failure_exits_1(runner, tmp_path, small_csv):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    result = runner.invoke(main, ["detect", "--model", str(broken),
                                  "--data", small_csv])
    assert result.exit_code == 1
    err = getattr(result, "stderr", result.output)
    assert "error [" in err


def test_eval_readability_text_and_corpus(runner, tmp_path):
    text = tmp_path / "note.txt"
    text.write_text("The guard saw the open door. He shut it fast.")
    result = runner.invoke(main, ["eval", "readability", "--text", str(text)])
    assert result.exit_code == 0, result.output
    (report,) = stdout_lines(result)
    assert "FKGL" in report["metrics"]

    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "a.txt").write_text("The cat sat on the mat.")
    (corpus / "b.txt").write_text("Dr. Smith told the team to block the port.")
    result = runner.invoke(main, ["eval", "readability", "--corpus",
                                  str(corpus)])
    assert result.exit_code == 0, result.output
    (out,) = stdout_lines(result)
    assert out["n_texts"] == 2
    assert out["n_scored"] == 2
    assert out["files"] == ["a.txt", "b.txt"]
    # mean scores reflect the file contents, not the file names
    assert out["mean_scores"]["FKGL"] == pytest.approx(
        (out["reports"][0]["metrics"]["FKGL"]["score"]
         + out["reports"][1]["metrics"]["FKGL"]["score"]) / 2)


def test_eval_exam_replay_anchor(runner, fixtures_dir):
    result = runner.invoke(main, [
        "eval", "exam",
        "--fixture", os.path.join(fixtures_dir, "exam_a.json"),
        "--transport", "replay",
        "--replay-fixture", os.path.join(fixtures_dir, "exam_a_replies.json")])
    assert result.exit_code == 0, result.output
    (out,) = stdout_lines(result)
    assert out["n_total"] == 40
    assert out["n_correct"] == 33
    assert 100 * out["success_rate"] == 82.5


def test_eval_exam_mock_transport(runner, fixtures_dir):
    result = runner.invoke(main, [
        "eval", "exam",
        "--fixture", os.path.join(fixtures_dir, "exam_b.json"),
        "--transport", "mock"])
    assert result.exit_code == 0, result.output
    (out,) = stdout_lines(result)
    assert out["n_total"] == 10
    assert out["n_errored"] == 0


def test_load_config_defaults_and_sections(tmp_path):
    path = tmp_path / "hunt.ini"
    path.write_text("""
[model]
path = /models/forest.json

[server]
listen = 0.0.0.0:9000
api_token_env = MY_TOKEN

[store]
backend = embedded
root = /var/lib/hunt

[explainer]
n_samples = 750
top_k = 5
seed = 9

[assistant]
kind = mock
budget = 4096
""")
    cfg = load_config(str(path))
    assert cfg.model_path == "/models/forest.json"
    assert cfg.listen_addr == "0.0.0.0:9000"
    assert cfg.api_token_env == "MY_TOKEN"
    assert cfg.store.backend == "embedded"
    assert cfg.store.root == "/var/lib/hunt"
    assert cfg.lime.n_samples == 750
    assert cfg.lime.top_k == 5
    assert cfg.lime.seed == 9
    assert cfg.transport is not None and cfg.transport.kind == "mock"
    assert cfg.assistant_budget == 4096


def test_load_config_minimal_has_no_transport(tmp_path):
    path = tmp_path / "hunt.ini"
    path.write_text("[model]\npath = m.json\n")
    cfg = load_config(str(path))
    assert cfg.transport is None
    assert cfg.listen_addr == "127.0.0.1:8787"
    assert cfg.store.backend == "embedded"


def test_env_overrides_take_precedence(tmp_path, monkeypatch):
    path = tmp_path / "hunt.ini"
    path.write_text("""
[store]
backend = elastic
endpoint = http://config-host:9200
""")
    monkeypatch.setenv("HUNT_ES_URL", "http://env-host:9200")
    cfg = load_config(str(path))
    assert cfg.store.endpoint == "http://env-host:9200"
    monkeypatch.delenv("HUNT_ES_URL")
    cfg = load_config(str(path))
    assert cfg.store.endpoint == "http://config-host:9200"


def test_config_never_carries_secret_values(tmp_path, monkeypatch):
    monkeypatch.setenv("HUNT_ES_API_KEY", "super-secret-value")
    path = tmp_path / "hunt.ini"
    path.write_text("[store]\nbackend = elastic\nendpoint = http://h:9200\n")
    cfg = load_config(str(path))
    assert "super-secret-value" not in json.dumps(cfg.store.to_json())
    assert cfg.store.api_key_env == "HUNT_ES_API_KEY"
