import json
import os

import numpy as np
import pytest

from hunt.dataset import encode
from hunt.errors import MissingCoverWeights, TooManyFeatures
from hunt.forest import DecisionTree
from hunt.treeshap import (MAX_BRUTE_FEATURES, brute_ensemble_shap, brute_shap,
                           ensemble_shap, tree_shap)


@pytest.fixture(scope="module")
def instances(fixtures_dir):
    with open(os.path.join(fixtures_dir, "shap_instances.json")) as fh:
        return json.load(fh)["instances"]


def test_oracle_equivalence_on_committed_instances(instances):
    worst = 0.0
    for inst in instances:
        trees = [DecisionTree.from_json(t) for t in inst["trees"]]
        for point in inst["points"]:
            x = np.array(point)
            b1, p1 = ensemble_shap(trees, x, inst["n_features"],
                                   inst["n_classes"])
            b2, p2 = brute_ensemble_shap(trees, x, inst["n_features"],
                                         inst["n_classes"])
            worst = max(worst, np.abs(b1 - b2).max(), np.abs(p1 - p2).max())
    assert worst <= 1e-9


def test_local_accuracy_on_committed_instances(instances):
    """base + sum(phi) equals the ensemble output at x, per class."""
    for inst in instances:
        trees = [DecisionTree.from_json(t) for t in inst["trees"]]
        for point in inst["points"]:
            x = np.array(point)
            base, phi = ensemble_shap(trees, x, inst["n_features"],
                                      inst["n_classes"])
            out = np.zeros(inst["n_classes"])
            for tree in trees:
                leaf = int(tree.apply(x[None, :])[0])
                out += tree.leaf_distribution(leaf)
            out /= len(trees)
            assert np.abs(base + phi.sum(axis=0) - out).max() <= 1e-9


def test_model_level_local_accuracy(model, sample_split):
    _, test = sample_split
    for flow in test.rows[:25]:
        exp = tree_shap(model, flow)
        recon = exp.base_value + exp.phi.sum(axis=0)
        assert np.abs(recon - model.predict_proba(flow)).max() <= 1e-9


def test_predicted_class_and_top_feature_ordering(model, anomalous_flow):
    exp = tree_shap(model, anomalous_flow, top_k=8)
    assert exp.predicted_class == model.predict(anomalous_flow).class_label
    assert len(exp.top_features) == 8
    mags = [abs(v) for _, v in exp.top_features]
    assert mags == sorted(mags, reverse=True)
    names = {n for n, _ in exp.top_features}
    assert names <= set(model.schema.feature_names)


def test_missing_cover_weights_detected(instances):
    inst = instances[0]
    tree = DecisionTree.from_json(inst["trees"][0])
    tree.weight = np.zeros_like(tree.weight)
    with pytest.raises(MissingCoverWeights):
        ensemble_shap([tree], np.zeros(inst["n_features"]),
                      inst["n_features"], inst["n_classes"])


def test_brute_force_feature_cap(model, anomalous_flow):
    assert MAX_BRUTE_FEATURES == 15
    with pytest.raises(TooManyFeatures):
        brute_shap(model, anomalous_flow)  # 41 features


def test_phi_zero_for_unused_features(instances):
    inst = instances[0]
    trees = [DecisionTree.from_json(t) for t in inst["trees"]]
    used = set()
    for t in trees:
        used.update(int(f) for f in t.feature if f >= 0)
    x = np.array(inst["points"][0])
    _, phi = ensemble_shap(trees, x, inst["n_features"], inst["n_classes"])
    for f in range(inst["n_features"]):
        if f not in used:
            assert np.all(phi[f] == 0.0)


def test_base_value_is_cover_weighted_mean(instances):
    """Independent oracle: expected leaf output under cover-weight routing."""
    inst = instances[0]
    trees = [DecisionTree.from_json(t) for t in inst["trees"]]
    x = np.array(inst["points"][0])
    base, _ = ensemble_shap(trees, x, inst["n_features"], inst["n_classes"])
    want = np.zeros(inst["n_classes"])
    for tree in trees:
        root = tree.weight[0]
        for i in range(tree.n_nodes):
            if tree.is_leaf(i):
                want += (tree.weight[i] / root) * tree.leaf_distribution(i)
    want /= len(trees)
    assert np.abs(base - want).max() <= 1e-9
