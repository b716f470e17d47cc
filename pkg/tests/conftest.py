import os

import pytest

from hunt import forest
from hunt.dataset import LabeledDataset, parse_kdd_csv, split

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def sample_data():
    with open(os.path.join(FIXTURES, "kdd_sample.csv"), encoding="utf-8") as fh:
        return parse_kdd_csv(fh)


@pytest.fixture(scope="session")
def sample_split(sample_data):
    return split(sample_data, 0.2, 7)


@pytest.fixture(scope="session")
def model():
    with open(os.path.join(FIXTURES, "model_small.json"), "rb") as fh:
        return forest.load(fh)


@pytest.fixture(scope="session")
def tiny_train(sample_data):
    """Small slice with all five coarse classes, for fast training tests."""
    rows = list(sample_data.rows[:300])
    seen = {r.label for r in rows}
    from hunt.dataset import load_label_map
    tax = load_label_map()
    need = {"normal", "dos", "probe", "r2l", "u2r"} - {tax.coarse(l) for l in seen}
    for r in sample_data.rows[300:]:
        if not need:
            break
        c = tax.coarse(r.label)
        if c in need:
            rows.append(r)
            need.discard(c)
    assert not need
    return LabeledDataset(tuple(rows))


@pytest.fixture(scope="session")
def anomalous_flow(model, sample_split):
    _, test = sample_split
    for f in test.rows:
        if model.predict(f).class_label == "dos":
            return f
    raise AssertionError("no dos flow in test split")


@pytest.fixture(scope="session")
def normal_flow(model, sample_split):
    _, test = sample_split
    for f in test.rows:
        if not model.predict(f).is_anomalous:
            return f
    raise AssertionError("no normal flow in test split")
