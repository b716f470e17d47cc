"""Exact Shapley attributions for tree ensembles.

Two routes compute the same quantity:

* tree_shap: the polynomial-time path algorithm, using per-node cover
  weights to marginalize features not on the conditioning path.
* brute_shap: exponential subset enumeration against the same
  descend-and-marginalize value function; small instances only, used as
  the independent oracle in tests.

For both, the ensemble attribution is the mean of per-tree attributions,
matching a forest prediction that is the mean of per-tree leaf
distributions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dataset import NetworkFlow, encode
from .errors import MissingCoverWeights, TooManyFeatures


@dataclass(frozen=True)
class ShapExplanation:
    base_value: np.ndarray        # per-class expected model output
    phi: np.ndarray               # [feature, class]
    predicted_class: str
    top_features: tuple           # ((feature name, phi for predicted class), ...)

    def to_json(self):
        return {
            "base_value": self.base_value.tolist(),
            "phi": self.phi.tolist(),
            "predicted_class": self.predicted_class,
            "top_features": [[n, float(v)] for n, v in self.top_features],
        }


def _leaf_values(tree):
    """Per-node output distributions (rows only meaningful for leaves)."""
    sums = tree.class_counts.sum(axis=1, keepdims=True)
    safe = np.where(sums > 0, sums, 1.0)
    return tree.class_counts / safe


def _check_cover(tree):
    if tree.weight is None or len(tree.weight) == 0 or tree.weight[0] <= 0:
        raise MissingCoverWeights("tree has no recorded cover weights")


# --- path algorithm -----------------------------------------------------------

class _PathElement:
    __slots__ = ("d", "z", "o", "w")

    def __init__(self, d, z, o, w):
        self.d = d
        self.z = z
        self.o = o
        self.w = w


def _extend(m, pz, po, pi):
    l = len(m)
    m = [_PathElement(e.d, e.z, e.o, e.w) for e in m]
    m.append(_PathElement(pi, pz, po, 1.0 if l == 0 else 0.0))
    for i in range(l - 1, -1, -1):
        m[i + 1].w += po * m[i].w * (i + 1) / (l + 1)
        m[i].w = pz * m[i].w * (l - i) / (l + 1)
    return m


def _unwind(m, i):
    l = len(m)
    o, z = m[i].o, m[i].z
    # weights follow the removal recurrence over positions 0..l-2; the
    # attribute triples skip element i
    out = [_PathElement(e.d, e.z, e.o, e.w) for e in m[:-1]]
    n = m[l - 1].w
    for j in range(l - 2, -1, -1):
        if o != 0:
            t = out[j].w
            out[j].w = n * l / ((j + 1) * o)
            n = t - out[j].w * z * (l - 1 - j) / l
        else:
            out[j].w = out[j].w * l / (z * (l - 1 - j))
    for j in range(i, l - 1):
        src = m[j + 1]
        out[j].d, out[j].z, out[j].o = src.d, src.z, src.o
    return out


def _unwound_sum(m, i):
    """Sum of path weights after removing element i, without mutating m."""
    l = len(m)
    o, z = m[i].o, m[i].z
    total = 0.0
    n = m[l - 1].w
    for j in range(l - 2, -1, -1):
        if o != 0:
            t = m[j].w
            w = n * l / ((j + 1) * o)
            n = t - w * z * (l - 1 - j) / l
        else:
            w = m[j].w * l / (z * (l - 1 - j))
        total += w
    return total


def _tree_shap_single(tree, x, leaf_vals, phi):
    """Accumulate path-dependent Shapley values for one tree, one output."""

    def recurse(node, m, pz, po, pi):
        m = _extend(m, pz, po, pi)
        if tree.is_leaf(node):
            v = leaf_vals[node]
            for i in range(1, len(m)):
                w = _unwound_sum(m, i)
                phi[m[i].d] += w * (m[i].o - m[i].z) * v
            return
        f = int(tree.feature[node])
        if x[f] <= tree.threshold[node]:
            hot, cold = int(tree.left[node]), int(tree.right[node])
        else:
            hot, cold = int(tree.right[node]), int(tree.left[node])
        iz = io = 1.0
        k = next((i for i in range(1, len(m)) if m[i].d == f), None)
        if k is not None:
            iz, io = m[k].z, m[k].o
            m = _unwind(m, k)
        rj = tree.weight[node]
        recurse(hot, m, iz * tree.weight[hot] / rj, io, f)
        recurse(cold, m, iz * tree.weight[cold] / rj, 0.0, f)

    recurse(0, [], 1.0, 1.0, -1)


def _tree_base_value(tree, leaf_vals):
    """Cover-weighted mean output over leaves (the empty-coalition value)."""

    def descend(node):
        if tree.is_leaf(node):
            return leaf_vals[node]
        l, r = int(tree.left[node]), int(tree.right[node])
        wl = tree.weight[l] / tree.weight[node]
        wr = tree.weight[r] / tree.weight[node]
        return wl * descend(l) + wr * descend(r)

    return descend(0)


def ensemble_shap(trees, x, n_features, n_classes):
    """Path-dependent SHAP for an ensemble; returns (base[class], phi[feature, class])."""
    phi = np.zeros((n_features, n_classes))
    base = np.zeros(n_classes)
    for tree in trees:
        _check_cover(tree)
        leaf_vals = _leaf_values(tree)
        base += _tree_base_value(tree, leaf_vals)
        for c in range(n_classes):
            col = np.zeros(n_features)
            _tree_shap_single(tree, x, leaf_vals[:, c], col)
            phi[:, c] += col
    return base / len(trees), phi / len(trees)


# --- brute-force oracle ---------------------------------------------------------

MAX_BRUTE_FEATURES = 15


def _descend_value(tree, x, coalition, leaf_vals, node=0):
    if tree.is_leaf(node):
        return leaf_vals[node]
    f = int(tree.feature[node])
    l, r = int(tree.left[node]), int(tree.right[node])
    if f in coalition:
        nxt = l if x[f] <= tree.threshold[node] else r
        return _descend_value(tree, x, coalition, leaf_vals, nxt)
    wl = tree.weight[l] / tree.weight[node]
    wr = tree.weight[r] / tree.weight[node]
    return (wl * _descend_value(tree, x, coalition, leaf_vals, l)
            + wr * _descend_value(tree, x, coalition, leaf_vals, r))


def brute_shap_tree(tree, x, n_features, n_classes):
    """Exact Shapley values for one tree by subset enumeration."""
    _check_cover(tree)
    leaf_vals = _leaf_values(tree)
    used = sorted({int(f) for f in tree.feature if f >= 0})
    phi = np.zeros((n_features, n_classes))
    base = _tree_base_value(tree, leaf_vals)
    if not used:
        return base, phi
    m = len(used)
    # cache value function over subsets of the used features
    values = {}
    for k in range(m + 1):
        for sub in itertools.combinations(used, k):
            values[frozenset(sub)] = _descend_value(tree, x, frozenset(sub), leaf_vals)
    fact = [math.factorial(i) for i in range(m + 1)]
    for f in used:
        others = [u for u in used if u != f]
        for k in range(len(others) + 1):
            w = fact[k] * fact[m - k - 1] / fact[m]
            for sub in itertools.combinations(others, k):
                s = frozenset(sub)
                phi[f] += w * (values[s | {f}] - values[s])
    return base, phi


def brute_ensemble_shap(trees, x, n_features, n_classes):
    if n_features > MAX_BRUTE_FEATURES:
        raise TooManyFeatures(
            f"{n_features} features exceed the brute-force cap of {MAX_BRUTE_FEATURES}")
    phi = np.zeros((n_features, n_classes))
    base = np.zeros(n_classes)
    for tree in trees:
        b, p = brute_shap_tree(tree, x, n_features, n_classes)
        base += b
        phi += p
    return base / len(trees), phi / len(trees)


# --- model-level wrappers ---------------------------------------------------------

def _wrap(model, x, base, phi, top_k=None):
    proba = base + phi.sum(axis=0)
    ci = int(np.argmax(proba))
    col = phi[:, ci]
    order = sorted(range(len(col)), key=lambda i: (-abs(col[i]), i))
    if top_k is not None:
        order = order[:top_k]
    top = tuple((model.schema.feature_names[i], float(col[i])) for i in order)
    return ShapExplanation(base, phi, model.classes[ci], top)


def tree_shap(model, flow: NetworkFlow, top_k: int = 8) -> ShapExplanation:
    x = encode(flow, model.schema)
    base, phi = ensemble_shap(model.trees, x, len(model.schema.feature_names),
                              len(model.classes))
    return _wrap(model, x, base, phi, top_k)


def brute_shap(model, flow: NetworkFlow, top_k: int = 8) -> ShapExplanation:
    x = encode(flow, model.schema)
    base, phi = brute_ensemble_shap(model.trees, x,
                                    len(model.schema.feature_names),
                                    len(model.classes))
    return _wrap(model, x, base, phi, top_k)
