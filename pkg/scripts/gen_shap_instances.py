"""Generate small committed tree-ensemble instances for Shapley testing.

Each instance is a tiny random ensemble (<= 5 trees, depth <= 3, <= 12
features) built by routing a random sample through random splits, so every
node's cover weight equals the count of samples reaching it and a parent's
weight equals the sum of its children's. Evaluation points are sampled
uniformly. Output: tests/fixtures/shap_instances.json
"""

import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hunt.forest import DecisionTree  # noqa: E402

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures",
                   "shap_instances.json")

rng = np.random.default_rng(20240902)


def build_tree(X, y, n_classes, max_depth):
    feature, threshold, left, right, weight, counts = [], [], [], [], [], []

    def new_node(idx):
        i = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        weight.append(float(len(idx)))
        counts.append(np.bincount(y[idx], minlength=n_classes).astype(float).tolist())
        return i

    def grow(idx, depth):
        node = new_node(idx)
        if depth >= max_depth or len(idx) < 4 or rng.random() < 0.15:
            return node
        f = int(rng.integers(0, X.shape[1]))
        col = X[idx, f]
        lo, hi = col.min(), col.max()
        if hi - lo < 1e-9:
            return node
        t = float(rng.uniform(lo, hi))
        go_left = col <= t
        if not go_left.any() or go_left.all():
            return node
        feature[node] = f
        threshold[node] = t
        left[node] = grow(idx[go_left], depth + 1)
        right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(len(X)), 0)
    return DecisionTree(feature, threshold, left, right, weight, counts, {})


def main():
    instances = []
    for spec in [(5, 2, 1, 2), (8, 3, 3, 3), (12, 5, 5, 3),
                 (6, 4, 4, 3), (10, 2, 5, 3), (12, 3, 2, 1)]:
        n_features, n_classes, n_trees, max_depth = spec
        X = rng.uniform(0, 1, (160, n_features))
        y = rng.integers(0, n_classes, 160)
        trees = [build_tree(X, y, n_classes, max_depth) for _ in range(n_trees)]
        points = rng.uniform(-0.2, 1.2, (5, n_features))
        instances.append({
            "n_features": n_features,
            "n_classes": n_classes,
            "max_depth": max_depth,
            "trees": [t.to_json() for t in trees],
            "points": [p.tolist() for p in points],
        })
    with open(OUT, "w", encoding="utf-8") as fh:
        json.dump({"instances": instances}, fh, indent=1, sort_keys=True)
    print(f"wrote {len(instances)} instances to {OUT}")


if __name__ == "__main__":
    main()
