"""Random forest training, prediction, and versioned serialization.

Trees record the bootstrap sample count reaching every node (the cover
weight) because the SHAP computation in hunt.treeshap depends on it, and
every leaf tracks raw attack-label counts so predictions can name the
specific genre behind a coarse verdict.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import (FeatureSchema, LabeledDataset, NetworkFlow, N_FEATURES,
                      encode, encode_dataset, build_schema)
from .errors import (ChecksumMismatch, EmptyInput, ModelError, SingleClass,
                     TruncatedModel, VersionMismatch)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Hyperparameters:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    features_per_split: int = int(math.isqrt(N_FEATURES))  # floor(sqrt(41)) = 6
    seed: int = 0
    class_weight: dict | None = None

    def to_json(self):
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
            "class_weight": self.class_weight,
        }

    @staticmethod
    def from_json(obj):
        return Hyperparameters(**obj)


class DecisionTree:
    """Binary CART tree stored as parallel arrays.

    feature[i] == -1 marks a leaf. weight[i] is the bootstrap sample count
    reaching node i; a parent's weight equals the sum of its children's.
    """

    def __init__(self, feature, threshold, left, right, weight, class_counts,
                 leaf_raw_counts):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.weight = np.asarray(weight, dtype=np.float64)
        self.class_counts = np.asarray(class_counts, dtype=np.float64)
        self.leaf_raw_counts = leaf_raw_counts  # {node_index: {raw_idx: count}}

    @property
    def n_nodes(self):
        return len(self.feature)

    def is_leaf(self, i):
        return self.feature[i] < 0

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Vectorized descent; returns the leaf index for every row."""
        node = np.zeros(len(X), dtype=np.int32)
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return node
            idx = np.nonzero(active)[0]
            go_left = X[idx, f[idx]] <= self.threshold[node[idx]]
            node[idx] = np.where(go_left, self.left[node[idx]], self.right[node[idx]])

    def leaf_distribution(self, leaf: int) -> np.ndarray:
        c = self.class_counts[leaf]
        return c / c.sum()

    def to_json(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "weight": self.weight.tolist(),
            "class_counts": self.class_counts.tolist(),
            "leaf_raw_counts": {str(k): {str(a): b for a, b in v.items()}
                                for k, v in self.leaf_raw_counts.items()},
        }

    @staticmethod
    def from_json(obj):
        raw = {int(k): {int(a): b for a, b in v.items()}
               for k, v in obj["leaf_raw_counts"].items()}
        return DecisionTree(obj["feature"], obj["threshold"], obj["left"],
                            obj["right"], obj["weight"], obj["class_counts"], raw)


@dataclass(frozen=True)
class Prediction:
    class_label: str
    genre: str
    is_anomalous: bool
    probabilities: dict  # coarse class -> probability
    model_version: str

    def to_json(self):
        return {
            "label": self.class_label,
            "genre": self.genre,
            "is_anomalous": self.is_anomalous,
            "probabilities": self.probabilities,
            "model_version": self.model_version,
        }


@dataclass
class RandomForestModel:
    trees: list
    schema: FeatureSchema
    hyperparameters: Hyperparameters
    base_rate: np.ndarray  # per-class mean predicted probability on training set
    training_digest: str
    raw_labels: tuple  # raw label vocabulary, index-aligned with leaf_raw_counts
    training_stats: dict = field(default_factory=dict)

    @property
    def classes(self):
        return self.schema.classes

    @property
    def model_version(self):
        return self.training_digest[:12]

    def predict_proba_encoded(self, X: np.ndarray) -> np.ndarray:
        proba = np.zeros((len(X), len(self.classes)))
        for tree in self.trees:
            leaves = tree.apply(X)
            counts = tree.class_counts[leaves]
            proba += counts / counts.sum(axis=1, keepdims=True)
        return proba / len(self.trees)

    def predict_proba(self, flow: NetworkFlow, mode="lenient") -> np.ndarray:
        x = encode(flow, self.schema, mode)
        return self.predict_proba_encoded(x[None, :])[0]

    def predict(self, flow: NetworkFlow, mode="lenient") -> Prediction:
        x = encode(flow, self.schema, mode)
        proba = self.predict_proba_encoded(x[None, :])[0]
        ci = int(np.argmax(proba))  # ties broken by lowest class index
        label = self.classes[ci]
        genre = self._resolve_genre(x, ci)
        return Prediction(
            class_label=label,
            genre=genre,
            is_anomalous=label != "normal",
            probabilities={c: float(p) for c, p in zip(self.classes, proba)},
            model_version=self.model_version,
        )

    def _resolve_genre(self, x: np.ndarray, class_index: int) -> str:
        """Majority raw label among training samples in the leaves voting
        for the winning class, restricted to raw labels of that class."""
        tax = self.schema.taxonomy
        want = self.classes[class_index]
        votes = {}
        fallback = {}
        for tree in self.trees:
            leaf = int(tree.apply(x[None, :])[0])
            raw_counts = tree.leaf_raw_counts.get(leaf, {})
            bucket = votes if int(np.argmax(tree.class_counts[leaf])) == class_index else fallback
            for raw_idx, n in raw_counts.items():
                if tax.coarse(self.raw_labels[raw_idx]) == want:
                    bucket[raw_idx] = bucket.get(raw_idx, 0) + n
        pool = votes or fallback
        if not pool:
            return want
        best = min(pool, key=lambda k: (-pool[k], k))
        return tax.genre(self.raw_labels[best])

    def to_json(self):
        return {
            "version": FORMAT_VERSION,
            "schema": self.schema.to_json(),
            "hyperparameters": self.hyperparameters.to_json(),
            "base_rate": self.base_rate.tolist(),
            "trees": [t.to_json() for t in self.trees],
            "training_digest": self.training_digest,
            "raw_labels": list(self.raw_labels),
            "training_stats": self.training_stats,
        }


# --- training ----------------------------------------------------------------

def _gini_gain(values, labels_onehot, min_leaf, sample_w):
    """Best threshold for one feature; returns (impurity, threshold) or None.

    labels_onehot is (n, n_classes) of per-sample class weights; impurity is
    the weighted mean child Gini.
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    oh = labels_onehot[order]
    w = sample_w[order]
    cum = np.cumsum(oh, axis=0)
    cum_w = np.cumsum(w)
    total = cum[-1]
    total_w = cum_w[-1]
    # candidate split after position i (1-indexed count on the left)
    distinct = np.nonzero(v[:-1] < v[1:])[0]
    if len(distinct) == 0:
        return None
    if min_leaf > 1:
        distinct = distinct[(distinct + 1 >= min_leaf)
                            & (len(v) - distinct - 1 >= min_leaf)]
        if len(distinct) == 0:
            return None
    lc = cum[distinct]
    lw = cum_w[distinct]
    rc = total - lc
    rw = total_w - lw
    gini_l = 1.0 - np.sum((lc / lw[:, None]) ** 2, axis=1)
    gini_r = 1.0 - np.sum((rc / rw[:, None]) ** 2, axis=1)
    imp = (lw * gini_l + rw * gini_r) / total_w
    best = int(np.argmin(imp))
    thr = (v[distinct[best]] + v[distinct[best] + 1]) / 2.0
    return float(imp[best]), thr


class _TreeBuilder:
    def __init__(self, X, y, raw_y, n_classes, hp, rng, class_w):
        self.X = X
        self.y = y
        self.raw_y = raw_y
        self.n_classes = n_classes
        self.hp = hp
        self.rng = rng
        self.onehot = np.zeros((len(y), n_classes))
        self.onehot[np.arange(len(y)), y] = class_w[y]
        self.sample_w = class_w[y]
        self.nodes = []  # [feature, threshold, left, right, weight]
        self.class_counts = []
        self.leaf_raw_counts = {}

    def build(self, idx):
        self._grow(idx, 0)
        feat = [n[0] for n in self.nodes]
        thr = [n[1] for n in self.nodes]
        left = [n[2] for n in self.nodes]
        right = [n[3] for n in self.nodes]
        w = [n[4] for n in self.nodes]
        return DecisionTree(feat, thr, left, right, w,
                            np.array(self.class_counts), self.leaf_raw_counts)

    def _leaf(self, idx):
        node_id = len(self.nodes)
        self.nodes.append([-1, 0.0, -1, -1, float(len(idx))])
        counts = np.bincount(self.y[idx], weights=self.sample_w[idx],
                             minlength=self.n_classes)
        self.class_counts.append(counts)
        raw = np.bincount(self.raw_y[idx])
        self.leaf_raw_counts[node_id] = {int(i): int(c)
                                         for i, c in enumerate(raw) if c > 0}
        return node_id

    def _grow(self, idx, depth):
        hp = self.hp
        y = self.y[idx]
        if (len(idx) < 2 * hp.min_samples_leaf
                or (hp.max_depth is not None and depth >= hp.max_depth)
                or (y == y[0]).all()):
            return self._leaf(idx)
        # examine random features until features_per_split splittable ones seen
        order = self.rng.permutation(self.X.shape[1])
        best = None  # (impurity, feature, threshold)
        tried = 0
        for f in order:
            res = _gini_gain(self.X[idx, f], self.onehot[idx],
                             hp.min_samples_leaf, self.sample_w[idx])
            if res is None:
                continue
            tried += 1
            imp, thr = res
            if best is None or imp < best[0] - 1e-15:
                best = (imp, int(f), thr)
            if tried >= hp.features_per_split:
                break
        if best is None:
            return self._leaf(idx)
        _, f, thr = best
        go_left = self.X[idx, f] <= thr
        node_id = len(self.nodes)
        self.nodes.append([f, thr, -1, -1, float(len(idx))])
        self.class_counts.append(np.zeros(self.n_classes))
        left_id = self._grow(idx[go_left], depth + 1)
        right_id = self._grow(idx[~go_left], depth + 1)
        self.nodes[node_id][2] = left_id
        self.nodes[node_id][3] = right_id
        return node_id


def _training_stats(X, schema):
    stats = {"mean": [], "std": [], "quartiles": [], "categorical_freq": {}}
    for i, name in enumerate(schema.feature_names):
        col = X[:, i]
        stats["mean"].append(float(col.mean()))
        stats["std"].append(float(col.std()))
        stats["quartiles"].append([float(np.percentile(col, q)) for q in (25, 50, 75)])
        if name in schema.vocabularies:
            vals, counts = np.unique(col, return_counts=True)
            stats["categorical_freq"][name] = {
                str(int(v)): float(c) / len(col) for v, c in zip(vals, counts)}
    return stats


def train(data: LabeledDataset, hp: Hyperparameters = Hyperparameters(),
          allow_degenerate: bool = False):
    """Train a forest; returns (model, report).

    Deterministic for a fixed (data, hp): per-tree RNGs are seeded with
    hp.seed + tree_index and bootstrap/feature draws happen in a fixed order.
    """
    if not data.rows:
        raise EmptyInput("empty training data")
    if hp.n_trees < 1:
        raise ModelError("n_trees must be >= 1")
    schema = data.schema if data.schema and data.schema.taxonomy else build_schema(data)
    X, y = encode_dataset(data, schema)
    raw_labels = tuple(sorted({r.label for r in data.rows}))
    raw_index = {l: i for i, l in enumerate(raw_labels)}
    raw_y = np.array([raw_index[r.label] for r in data.rows], dtype=np.int64)

    n_classes = len(schema.classes)
    if n_classes < 2 and not allow_degenerate:
        raise SingleClass("training data contains a single coarse class")

    class_w = np.ones(n_classes)
    if hp.class_weight:
        for c, w in hp.class_weight.items():
            class_w[schema.class_index(c)] = w

    trees = []
    n = len(X)
    for t in range(hp.n_trees):
        rng = np.random.default_rng(hp.seed + t)
        boot = rng.integers(0, n, n)
        builder = _TreeBuilder(X, y, raw_y, n_classes, hp, rng, class_w)
        trees.append(builder.build(boot))

    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(X).tobytes())
    digest.update(np.ascontiguousarray(y).tobytes())
    digest.update(json.dumps(hp.to_json(), sort_keys=True).encode())

    model = RandomForestModel(
        trees=trees,
        schema=schema,
        hyperparameters=hp,
        base_rate=np.zeros(n_classes),
        training_digest=digest.hexdigest(),
        raw_labels=raw_labels,
        training_stats=_training_stats(X, schema),
    )
    proba = model.predict_proba_encoded(X)
    model.base_rate = proba.mean(axis=0)

    report = {
        "n_rows": n,
        "class_counts": {c: int((y == i).sum()) for i, c in enumerate(schema.classes)},
        "n_trees": hp.n_trees,
        "training_accuracy": float((np.argmax(proba, axis=1) == y).mean()),
        "model_version": model.model_version,
    }
    return model, report


# --- serialization -------------------------------------------------------------

def save(model: RandomForestModel) -> bytes:
    body = model.to_json()
    payload = json.dumps(body, sort_keys=True, separators=(",", ":"))
    checksum = hashlib.sha256(payload.encode()).hexdigest()
    return json.dumps({"version": FORMAT_VERSION, "checksum": checksum,
                       "body": body}, sort_keys=True,
                      separators=(",", ":")).encode()


def load(source) -> RandomForestModel:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, str):
        source = source.encode()
    try:
        envelope = json.loads(source.decode("utf-8"))
        version = envelope["version"]
        checksum = envelope["checksum"]
        body = envelope["body"]
    except (ValueError, KeyError, UnicodeDecodeError) as e:
        raise TruncatedModel(f"model stream is not a complete container: {e}") from None
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {version}, expected {FORMAT_VERSION}")
    payload = json.dumps(body, sort_keys=True, separators=(",", ":"))
    if hashlib.sha256(payload.encode()).hexdigest() != checksum:
        raise ChecksumMismatch("model payload does not match its checksum")
    if body.get("version") != FORMAT_VERSION:
        raise VersionMismatch("inner model version mismatch")
    return RandomForestModel(
        trees=[DecisionTree.from_json(t) for t in body["trees"]],
        schema=FeatureSchema.from_json(body["schema"]),
        hyperparameters=Hyperparameters.from_json(body["hyperparameters"]),
        base_rate=np.array(body["base_rate"]),
        training_digest=body["training_digest"],
        raw_labels=tuple(body["raw_labels"]),
        training_stats=body["training_stats"],
    )
