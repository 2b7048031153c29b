"""Command-line front end.

Subcommands: build-model (model spec -> model file), run (experiment config
-> results CSV), oracle (model file -> optimal value and policy), check
(config + CSV -> bound report), posterior (model + transcript -> posterior
dump).
"""

from __future__ import annotations

import argparse
import json
import sys

from .builders import ModelSpec, build_model
from .harness import (
    ExperimentConfig,
    check_bounds,
    read_csv,
    resolve_model,
    run_experiment,
    summarize,
    write_csv,
)
from .model import (
    edge_entropy,
    expected_infections,
    load_model,
    node_marginals,
    prior_posterior,
    save_model,
)
from .oracle import direct_posterior, optimal_expected_tests
from .sets import mask_of


def _load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_json(json.load(fh))


def cmd_build_model(args) -> int:
    if args.spec:
        with open(args.spec) as fh:
            doc = json.load(fh)
        spec = ModelSpec(doc["family"], doc.get("params", {}))
    else:
        spec = ModelSpec(args.family, json.loads(args.params))
    graph, dist = build_model(spec)
    save_model(args.out, graph, dist)
    print(f"wrote {args.out}: n={graph.n}, |E|={len(graph)}, "
          f"H={edge_entropy(dist):.5f} bits, mu={expected_infections(prior_posterior(graph, dist)):.5f}")
    return 0


def cmd_run(args) -> int:
    config = _load_config(args.config)
    out = args.out or config.output
    if not out:
        print("no output path: give --out or set output in the config", file=sys.stderr)
        return 2
    results = run_experiment(config)
    write_csv(results, out)
    s = summarize(results)
    print(f"wrote {out}: {s.count} trials, mean tests {s.tests.mean:.4f} "
          f"(stderr {s.tests.stderr:.4f}), error rate {s.error_rate:.4f}, "
          f"halt rate {s.halt_rate:.4f}")
    return 0


def cmd_oracle(args) -> int:
    graph, dist = load_model(args.model)
    value, policy = optimal_expected_tests(graph, dist)
    print(f"optimal expected tests: {value:.6f}")
    print(f"entropy H(X): {edge_entropy(dist):.6f} bits")
    if args.policy:
        with open(args.policy, "w") as fh:
            fh.write(policy.to_text())
        print(f"wrote policy tree to {args.policy}")
    return 0


def cmd_check(args) -> int:
    config = _load_config(args.config)
    graph, dist = resolve_model(config)
    results = read_csv(args.csv)
    report = check_bounds(graph, dist, results, config)
    print(report.to_text())
    return 0 if report.all_passed else 1


def cmd_posterior(args) -> int:
    graph, dist = load_model(args.model)
    with open(args.transcript) as fh:
        doc = json.load(fh)
    transcript = [(mask_of(rec["query"]), bool(rec["outcome"])) for rec in doc]
    post = direct_posterior(graph, dist, transcript, delta=args.delta)
    dump = {
        "q": [float(x) for x in post.q],
        "marginals": [float(x) for x in node_marginals(post)],
        "expected_infections": expected_infections(post),
    }
    text = json.dumps(dump, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hypergt",
                                     description="group testing with correlated infections")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-model", help="build a model file from a family spec")
    p.add_argument("--spec", help="JSON file with {family, params}")
    p.add_argument("--family", help="family name (with --params)")
    p.add_argument("--params", default="{}", help="JSON parameter record")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_model)

    p = sub.add_parser("run", help="run an experiment config to a results CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="optimal policy value for a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--policy", help="write the decision tree here")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="bound report for a results CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("posterior", help="posterior after a transcript file")
    p.add_argument("--model", required=True)
    p.add_argument("--transcript", required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_posterior)

    args = parser.parse_args(argv)
    if args.command == "build-model" and not args.spec and not args.family:
        parser.error("build-model needs --spec or --family")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
