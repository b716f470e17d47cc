"""LIME-style local surrogate explanations for tabular flows.

Perturbs around one instance, queries the black box, and fits a
kernel-weighted ridge surrogate on a binarized neighborhood:
numeric features are sampled from training statistics and compared
against the quartile bin of the instance; categorical features are
resampled from training frequencies and compared for equality.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.linear_model import Ridge

from .dataset import NetworkFlow, encode, N_FEATURES


@dataclass(frozen=True)
class LimeConfig:
    n_samples: int = 5000
    kernel_width: float = math.sqrt(N_FEATURES) * 0.75
    top_k: int = 8
    ridge_alpha: float = 1.0
    seed: int = 0

    def to_json(self):
        return {"n_samples": self.n_samples, "kernel_width": self.kernel_width,
                "top_k": self.top_k, "ridge_alpha": self.ridge_alpha,
                "seed": self.seed}


@dataclass(frozen=True)
class LimeFactor:
    feature: str
    condition: str
    weight: float
    direction: str  # supports | opposes

    def to_json(self):
        return {"feature": self.feature, "condition": self.condition,
                "weight": self.weight, "direction": self.direction}


@dataclass(frozen=True)
class LimeExplanation:
    intercept: float
    factors: tuple  # LimeFactor, sorted by |weight| descending
    r_squared: float
    config: LimeConfig
    predicted_class: str = ""

    def to_json(self):
        return {"intercept": self.intercept,
                "factors": [f.to_json() for f in self.factors],
                "r_squared": self.r_squared,
                "predicted_class": self.predicted_class,
                "sampling": self.config.to_json()}


def _bin_index(value, quartiles):
    for i, q in enumerate(quartiles):
        if value <= q:
            return i
    return len(quartiles)


def _bin_condition(name, value, quartiles):
    q1, q2, q3 = quartiles
    b = _bin_index(value, quartiles)
    if b == 0:
        return f"{name} <= {q1:g}"
    if b == 1:
        return f"{q1:g} < {name} <= {q2:g}"
    if b == 2:
        return f"{q2:g} < {name} <= {q3:g}"
    return f"{name} > {q3:g}"


def _forward_selection(Z, target, weights, top_k, alpha):
    """Greedy weighted-ridge feature selection; ties resolved by lowest index."""
    selected = []
    remaining = list(range(Z.shape[1]))
    for _ in range(min(top_k, Z.shape[1])):
        best, best_score = None, -np.inf
        for f in remaining:
            cols = selected + [f]
            reg = Ridge(alpha=alpha)
            reg.fit(Z[:, cols], target, sample_weight=weights)
            score = reg.score(Z[:, cols], target, sample_weight=weights)
            if score > best_score + 1e-12:
                best, best_score = f, score
        if best is None:
            break
        selected.append(best)
        remaining.remove(best)
    return selected


def lime_explain(predict_fn, x, stats, feature_names, categorical_features,
                 config: LimeConfig = LimeConfig()):
    """Explain predict_fn (scalar score on encoded vectors) around instance x.

    stats follows the layout produced at training time: per-feature mean,
    std, quartiles, and per-categorical ordinal frequencies.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_samples
    d = len(feature_names)
    raw = np.tile(x, (n, 1))
    Z = np.ones((n, d))
    conditions = []
    degenerate = []

    for i, name in enumerate(feature_names):
        if name in categorical_features:
            freq = stats["categorical_freq"][name]
            tokens = np.array([float(t) for t in sorted(freq, key=float)])
            probs = np.array([freq[t] for t in sorted(freq, key=float)])
            probs = probs / probs.sum()
            draw = rng.choice(tokens, size=n, p=probs)
            raw[:, i] = draw
            Z[:, i] = (draw == x[i]).astype(float)
            conditions.append(f"{name} = {x[i]:g}")
        else:
            mean, std = stats["mean"][i], stats["std"][i]
            quarts = stats["quartiles"][i]
            draw = rng.normal(mean, std if std > 0 else 0.0, size=n)
            raw[:, i] = draw
            inst_bin = _bin_index(x[i], quarts)
            Z[:, i] = np.fromiter((_bin_index(v, quarts) == inst_bin for v in draw),
                                  dtype=float, count=n)
            conditions.append(_bin_condition(name, x[i], quarts))
    # first sample is the instance itself
    raw[0] = x
    Z[0] = 1.0

    target = np.asarray(predict_fn(raw), dtype=float)
    dist_sq = (1.0 - Z).sum(axis=1)  # squared euclidean on the binary space
    weights = np.exp(-dist_sq / config.kernel_width ** 2)

    usable = [i for i in range(d) if Z[:, i].std() > 0]
    for i in range(d):
        if i not in usable:
            degenerate.append(feature_names[i])
    if degenerate:
        warnings.warn("dropped zero-variance neighborhood features: "
                      + ", ".join(degenerate))
    if not usable:
        return LimeExplanation(float(np.average(target, weights=weights)), (),
                               0.0, config)

    Zu = Z[:, usable]
    picked = _forward_selection(Zu, target, weights, config.top_k,
                                config.ridge_alpha)
    cols = [usable[j] for j in picked]
    reg = Ridge(alpha=config.ridge_alpha)
    reg.fit(Z[:, cols], target, sample_weight=weights)
    r2 = float(min(1.0, max(0.0, reg.score(Z[:, cols], target,
                                           sample_weight=weights))))

    factors = [LimeFactor(feature_names[c], conditions[c], float(w),
                          "supports" if w > 0 else "opposes")
               for c, w in zip(cols, reg.coef_)]
    factors.sort(key=lambda f: (-abs(f.weight), f.feature))
    return LimeExplanation(float(reg.intercept_), tuple(factors), r2, config)


def lime_tabular(model, flow: NetworkFlow, config: LimeConfig = LimeConfig()):
    """LIME explanation of the forest's predicted-class probability."""
    x = encode(flow, model.schema)
    proba = model.predict_proba_encoded(x[None, :])[0]
    ci = int(np.argmax(proba))

    def predict_fn(samples):
        return model.predict_proba_encoded(samples)[:, ci]

    exp = lime_explain(predict_fn, x, model.training_stats,
                       model.schema.feature_names,
                       set(model.schema.vocabularies), config)
    return LimeExplanation(exp.intercept, exp.factors, exp.r_squared, config,
                           predicted_class=model.classes[ci])
