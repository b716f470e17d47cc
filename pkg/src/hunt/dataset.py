"""KDD99-format flow records: parsing, schema building, encoding, splitting."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import EmptyInput, ParseError, UnknownToken, WrongArity

# Canonical KDD99 feature order. Positions 1-3 are categorical, the rest numeric.
FEATURE_NAMES = (
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes",
    "land", "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in",
    "num_compromised", "root_shell", "su_attempted", "num_root",
    "num_file_creations", "num_shells", "num_access_files", "num_outbound_cmds",
    "is_host_login", "is_guest_login", "count", "srv_count", "serror_rate",
    "srv_serror_rate", "rerror_rate", "srv_rerror_rate", "same_srv_rate",
    "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate", "dst_host_srv_serror_rate", "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
)

CATEGORICAL_FEATURES = ("protocol_type", "service", "flag")

RATE_FEATURES = frozenset(n for n in FEATURE_NAMES if n.endswith("_rate"))

N_FEATURES = len(FEATURE_NAMES)  # 41

COARSE_CLASSES = ("normal", "dos", "probe", "r2l", "u2r")

# Sentinel ordinal for categorical tokens unseen at training time (lenient mode).
LENIENT = "lenient"
STRICT = "strict"


@dataclass(frozen=True)
class NetworkFlow:
    """One KDD99 connection record: 41 features plus an optional label."""

    values: tuple  # feature values in FEATURE_NAMES order; str for categoricals
    label: str | None = None

    def __post_init__(self):
        if len(self.values) != N_FEATURES:
            raise WrongArity(0, len(self.values))

    def __getattr__(self, name):
        try:
            return self.values[_FEATURE_INDEX[name]]
        except KeyError:
            raise AttributeError(name) from None

    def as_dict(self) -> dict:
        return dict(zip(FEATURE_NAMES, self.values))


_FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}


@dataclass(frozen=True)
class AttackTaxonomy:
    """Raw label token -> coarse class, plus a human-readable genre string."""

    raw_to_coarse: dict
    genres: dict  # raw label -> genre string shown to analysts

    def coarse(self, raw_label: str) -> str:
        key = _normalize_label(raw_label)
        if key not in self.raw_to_coarse:
            raise ParseError(0, "label", f"label {raw_label!r} not in taxonomy")
        return self.raw_to_coarse[key]

    def genre(self, raw_label: str) -> str:
        return self.genres.get(_normalize_label(raw_label), _normalize_label(raw_label))


@dataclass(frozen=True)
class FeatureSchema:
    """Fixed feature ordering plus categorical vocabularies and class taxonomy."""

    feature_names: tuple = FEATURE_NAMES
    vocabularies: dict = field(default_factory=dict)  # feature -> {token: ordinal}
    taxonomy: AttackTaxonomy | None = None
    classes: tuple = COARSE_CLASSES

    def class_index(self, coarse: str) -> int:
        return self.classes.index(coarse)

    def to_json(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "vocabularies": self.vocabularies,
            "classes": list(self.classes),
            "taxonomy": {
                "raw_to_coarse": self.taxonomy.raw_to_coarse,
                "genres": self.taxonomy.genres,
            } if self.taxonomy else None,
        }

    @staticmethod
    def from_json(obj: dict) -> "FeatureSchema":
        tax = None
        if obj.get("taxonomy"):
            tax = AttackTaxonomy(obj["taxonomy"]["raw_to_coarse"],
                                 obj["taxonomy"]["genres"])
        return FeatureSchema(
            feature_names=tuple(obj["feature_names"]),
            vocabularies={k: dict(v) for k, v in obj["vocabularies"].items()},
            taxonomy=tax,
            classes=tuple(obj["classes"]),
        )


@dataclass(frozen=True)
class LabeledDataset:
    rows: tuple  # NetworkFlow, all with labels
    schema: FeatureSchema | None = None

    def __len__(self):
        return len(self.rows)


def _normalize_label(token: str) -> str:
    return token.strip().rstrip(".").lower()


def load_label_map(path=None) -> AttackTaxonomy:
    """Load the raw-label -> coarse-class fixture (one `raw,coarse` pair per line)."""
    if path is None:
        text = resources.files("hunt.data").joinpath("kdd_label_map.csv").read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    raw_to_coarse = {}
    genres = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        raw, coarse = parts[0].strip(), parts[1].strip()
        raw_to_coarse[raw] = coarse
        genres[raw] = parts[2].strip() if len(parts) > 2 else raw
    return AttackTaxonomy(raw_to_coarse, genres)


def _parse_row(parts, lineno) -> NetworkFlow:
    if len(parts) not in (N_FEATURES, N_FEATURES + 1):
        raise WrongArity(lineno, len(parts))
    label = None
    if len(parts) == N_FEATURES + 1:
        label = _normalize_label(parts[-1])
        parts = parts[:N_FEATURES]
    values = []
    for name, raw in zip(FEATURE_NAMES, parts):
        raw = raw.strip()
        if name in CATEGORICAL_FEATURES:
            if not raw:
                raise ParseError(lineno, name, "empty categorical token")
            values.append(raw)
            continue
        try:
            v = int(raw)
        except ValueError:
            try:
                v = float(raw)
            except ValueError:
                raise ParseError(lineno, name, f"not numeric: {raw!r}") from None
        if name in RATE_FEATURES and not (0.0 <= v <= 1.0):
            raise ParseError(lineno, name, f"rate {v} outside [0,1]")
        if name not in RATE_FEATURES and v < 0:
            raise ParseError(lineno, name, f"negative count {v}")
        values.append(v)
    return NetworkFlow(tuple(values), label)


def parse_kdd_csv(source, has_header: bool = False):
    """Parse a KDD99 CSV byte/text stream into NetworkFlow rows.

    Returns a LabeledDataset when every row carries a label, otherwise a
    list of NetworkFlow. Labels have trailing periods stripped and are
    lowercased.
    """
    if isinstance(source, (bytes, bytearray)):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    elif hasattr(source, "read"):
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    else:  # iterable of lines
        text = "\n".join(source)

    rows = []
    lines = text.splitlines()
    start = 1 if has_header and lines else 0
    for i, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        rows.append(_parse_row(line.split(","), i))
    if not rows:
        raise EmptyInput("no rows in input")
    if all(r.label is not None for r in rows):
        return LabeledDataset(tuple(rows))
    return rows


def build_schema(data: LabeledDataset, taxonomy: AttackTaxonomy | None = None) -> FeatureSchema:
    """Derive vocabularies and taxonomy coverage from a labeled dataset.

    Vocabularies are the distinct tokens seen, sorted lexicographically and
    indexed densely from 0.
    """
    if not data.rows:
        raise EmptyInput("empty dataset")
    taxonomy = taxonomy or load_label_map()
    vocabs = {}
    for name in CATEGORICAL_FEATURES:
        idx = _FEATURE_INDEX[name]
        tokens = sorted({row.values[idx] for row in data.rows})
        vocabs[name] = {tok: i for i, tok in enumerate(tokens)}
    # taxonomy must cover every observed label
    for row in data.rows:
        taxonomy.coarse(row.label)
    observed = sorted({taxonomy.coarse(r.label) for r in data.rows})
    classes = tuple(c for c in COARSE_CLASSES if c in observed)
    return FeatureSchema(FEATURE_NAMES, vocabs, taxonomy, classes)


def encode(flow: NetworkFlow, schema: FeatureSchema, mode: str = LENIENT) -> np.ndarray:
    """Encode a flow as a fixed-length numeric vector (categoricals -> ordinals)."""
    out = np.empty(N_FEATURES, dtype=np.float64)
    for i, name in enumerate(schema.feature_names):
        v = flow.values[i]
        if name in CATEGORICAL_FEATURES:
            vocab = schema.vocabularies[name]
            if v in vocab:
                out[i] = vocab[v]
            elif mode == STRICT:
                raise UnknownToken(name, v)
            else:
                out[i] = len(vocab)  # sentinel for unseen tokens
        else:
            out[i] = v
    return out


def encode_dataset(data: LabeledDataset, schema: FeatureSchema, mode: str = LENIENT):
    """Vectorize a whole dataset; returns (X, y) with y as coarse-class indices."""
    X = np.stack([encode(r, schema, mode) for r in data.rows])
    y = np.array([schema.class_index(schema.taxonomy.coarse(r.label))
                  for r in data.rows], dtype=np.int64)
    return X, y


def split(data: LabeledDataset, test_fraction: float, seed: int):
    """Deterministic train/test partition, stratified by coarse class when possible."""
    if not data.rows:
        raise EmptyInput("empty dataset")
    if not (0.0 < test_fraction < 1.0):
        raise ValueError("test_fraction must be in (0,1)")
    n = len(data.rows)
    n_test = int(round(test_fraction * n))
    taxonomy = (data.schema.taxonomy if data.schema and data.schema.taxonomy
                else load_label_map())
    by_class = {}
    for i, row in enumerate(data.rows):
        by_class.setdefault(taxonomy.coarse(row.label), []).append(i)

    rng = np.random.default_rng(seed)
    stratify = all(len(v) >= 2 for v in by_class.values()) and len(by_class) > 1
    if not stratify:
        warnings.warn("stratified split not possible; falling back to a plain shuffle")
        order = rng.permutation(n)
        test_idx = set(order[:n_test].tolist())
    else:
        # largest-remainder apportionment so per-class counts sum to n_test
        quotas = {c: test_fraction * len(v) for c, v in by_class.items()}
        counts = {c: min(int(math.floor(q)), len(by_class[c])) for c, q in quotas.items()}
        short = n_test - sum(counts.values())
        remainders = sorted(by_class, key=lambda c: (counts[c] - quotas[c], c))
        for c in remainders:
            if short <= 0:
                break
            if counts[c] < len(by_class[c]):
                counts[c] += 1
                short -= 1
        test_idx = set()
        for c in sorted(by_class):
            idxs = np.array(by_class[c])
            order = rng.permutation(len(idxs))
            test_idx.update(idxs[order[:counts[c]]].tolist())

    train_rows = tuple(r for i, r in enumerate(data.rows) if i not in test_idx)
    test_rows = tuple(r for i, r in enumerate(data.rows) if i in test_idx)
    return (LabeledDataset(train_rows, data.schema),
            LabeledDataset(test_rows, data.schema))
