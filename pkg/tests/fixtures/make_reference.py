"""Regenerate reference_accuracy.json: mean test accuracy per family over seeds 1..5.

Run from the repository root: ``python3 tests/fixtures/make_reference.py``.
"""

from __future__ import annotations

import json
import statistics
from pathlib import Path

from tierpredict.dataset import default_config, generate_synthetic
from tierpredict.pipeline import FAMILY_ORDER, train_families

SEEDS = (1, 2, 3, 4, 5)


def reference_accuracies() -> dict:
    ds = generate_synthetic(default_config(n=2000, seed=42))
    per_seed = {fam: [] for fam in FAMILY_ORDER}
    baselines = []
    for s in SEEDS:
        run = train_families(ds, s, cv_folds=None, curve_fractions=None)
        baselines.append(run.majority_baseline)
        for fam, res in run.results.items():
            per_seed[fam].append(res.test_metrics.accuracy)
    return {
        "seeds": list(SEEDS),
        "per_seed": per_seed,
        "mean": {fam: statistics.fmean(v) for fam, v in per_seed.items()},
        "majority_baseline": statistics.fmean(baselines),
    }


if __name__ == "__main__":
    out = Path(__file__).with_name("reference_accuracy.json")
    out.write_text(json.dumps(reference_accuracies(), indent=2) + "\n", encoding="utf-8")
    print(out.read_text())
