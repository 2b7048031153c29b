#!/usr/bin/env python3
"""Sweep the split constant c over a model family and report the expected
test counts against the stage-budget bounds."""

import argparse
import json

from hypergt import ExperimentConfig, ModelSpec, check_bounds, run_experiment, summarize
from hypergt.harness import resolve_model


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--family", default="islands")
    ap.add_argument("--params", default='{"k": 6, "m": 2, "p": 0.5}')
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--cs", default="0.1,0.2,0.3,0.4")
    args = ap.parse_args()

    spec = ModelSpec(args.family, json.loads(args.params))
    for c in (float(x) for x in args.cs.split(",")):
        cfg = ExperimentConfig(model=spec, algorithm="base", trials=args.trials,
                               seed=args.seed, c=c)
        graph, dist = resolve_model(cfg)
        results = run_experiment(cfg, graph, dist)
        s = summarize(results)
        report = check_bounds(graph, dist, results, cfg)
        print(f"\n=== c = {c} | mean tests {s.tests.mean:.3f} "
              f"(stage 1 {s.stage1.mean:.3f}, stage 2 {s.stage2.mean:.3f})")
        print(report.to_text())


if __name__ == "__main__":
    main()
