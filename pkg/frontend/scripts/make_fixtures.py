"""Regenerate the client-mix parity fixture from the backend.

Runs the real model + mixing code on a small deterministic setup and dumps
the inputs plus expected outputs; the UI test replays the inputs through the
TypeScript implementation and asserts agreement within 1e-5 per shot.

Usage: python3 scripts/make_fixtures.py  (from the frontend/ directory)
"""

import json
import pathlib

import numpy as np

from querysum.model import (
    ModelConfig,
    QuerysumModel,
    TextQuery,
    default_budget,
    mix_scores,
    select_summary,
)

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "mix.json"


def main():
    rng = np.random.default_rng(123)
    model = QuerysumModel(ModelConfig.toy(feature_dim=16, n_intents=4, intent_dim=16), seed=3)
    cases = []
    for t in (32, 57, 128):
        features = rng.standard_normal((t, 16)).astype(np.float32)
        vectors = rng.standard_normal((2, 300)).astype(np.float32)
        query = TextQuery("a", "b", vectors)
        g, _ = model.intent_forward(features, query)
        h, _ = model.summary_forward(features)
        for delta in (0.0, model.cfg.delta, 0.2):
            scores, _ = mix_scores(g, h, delta)
            budget = default_budget(t)
            cases.append(
                {
                    "delta": float(delta),
                    "intent_probs": [float(x) for x in g],
                    "intent_shot_scores": [[float(x) for x in row] for row in h],
                    "expected_scores": [float(x) for x in scores],
                    "budget": budget,
                    "expected_budget_summary": select_summary(scores, "budget", budget=budget),
                    "expected_threshold_summary": select_summary(
                        scores, "threshold", threshold=0.05
                    ),
                    "threshold": 0.05,
                }
            )
    OUT.write_text(json.dumps(cases))
    print(f"wrote {OUT} ({len(cases)} cases)")


if __name__ == "__main__":
    main()
