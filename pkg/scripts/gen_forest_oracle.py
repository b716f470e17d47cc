#!/usr/bin/env python3
"""Freeze the reference random-forest accuracy on the committed sample.

Trains scikit-learn's RandomForestClassifier on exactly the split used by
the acceptance suite (fraction 0.2, seed 7) and writes the held-out
accuracy to tests/fixtures/forest_oracle.json.
"""

import hashlib
import json

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from hunt.dataset import (LabeledDataset, build_schema, encode_dataset,
                          parse_kdd_csv, split)

SAMPLE = "tests/fixtures/kdd_sample.csv"
OUT = "tests/fixtures/forest_oracle.json"


def main():
    raw = open(SAMPLE, "rb").read()
    data = parse_kdd_csv(raw)
    schema = build_schema(data)
    data = LabeledDataset(data.rows, schema)
    train_ds, test_ds = split(data, 0.2, seed=7)
    Xtr, ytr = encode_dataset(train_ds, schema)
    Xte, yte = encode_dataset(test_ds, schema)
    rf = RandomForestClassifier(n_estimators=100, random_state=7, n_jobs=-1)
    rf.fit(Xtr, ytr)
    acc = float(rf.score(Xte, yte))
    fixture = {
        "oracle": "sklearn.ensemble.RandomForestClassifier",
        "n_estimators": 100,
        "random_state": 7,
        "split": {"test_fraction": 0.2, "seed": 7},
        "sample_sha256": hashlib.sha256(raw).hexdigest(),
        "held_out_accuracy": acc,
    }
    with open(OUT, "w") as fh:
        json.dump(fixture, fh, indent=2)
    print(json.dumps(fixture, indent=2))


if __name__ == "__main__":
    main()
