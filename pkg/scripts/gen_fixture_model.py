"""Train and commit the small fixture forest used by the test suite.

Small on purpose (6 trees, depth 5) so exact Shapley attribution over a
thousand flows stays well inside the suite's time budget.
Output: tests/fixtures/model_small.json
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hunt.dataset import parse_kdd_csv, split  # noqa: E402
from hunt.forest import Hyperparameters, save, train  # noqa: E402

HERE = os.path.dirname(__file__)
SAMPLE = os.path.join(HERE, "..", "tests", "fixtures", "kdd_sample.csv")
OUT = os.path.join(HERE, "..", "tests", "fixtures", "model_small.json")


def main():
    with open(SAMPLE, "r", encoding="utf-8") as fh:
        data = parse_kdd_csv(fh)
    train_set, _ = split(data, 0.2, 7)
    model, report = train(train_set,
                          Hyperparameters(n_trees=6, max_depth=5, seed=7))
    with open(OUT, "wb") as fh:
        fh.write(save(model))
    print("trained", report)


if __name__ == "__main__":
    main()
