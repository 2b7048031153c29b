"""Symmetric-noise testing: the flip channel, exact Bayesian updates,
repetition-with-majority schedules, and the noisy adaptive / semi-non-adaptive
engines.

The posterior update is exact Bayes (prior times per-test likelihood,
normalized), applied once per physical test, so no positively weighted edge
ever reaches exact zero while the channel is noisy. Majority verdicts steer
control flow only: the group test of the residual nodes and the stage-2
individual tests are repeated and decided by majority, while weight-window
tests run once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .adaptive import AdaptiveConfig, _mask_from_bool, _split_scan, _uncertain_nodes
from .model import (
    CERTAINTY_TOL,
    EdgeDistribution,
    GroundTruth,
    Hypergraph,
    Posterior,
    certain_edge,
    edge_outcomes,
    expected_infections,
    node_marginals,
    noiseless_oracle,
    prior_posterior,
    reweight,
    validate_model,
)
from .snagt import SnagtConfig, _run as _snagt_run
from .transcript import INDIVIDUAL, RESIDUAL, SPLIT, Transcript

TestOracle = Callable[[int], bool]


@dataclass(frozen=True)
class NoiseChannel:
    """Each test outcome flips independently with probability delta."""

    delta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta < 0.5:
            raise ValueError(f"delta={self.delta} outside [0, 1/2)")


@dataclass
class RepetitionSchedule:
    """How often to repeat the repeated test sites.

    Group tests of the residual nodes run ceil(alpha * log2(n) / (1-2d)^2)
    times and stage-2 individual tests ceil(alpha * log2(g(n) * u) / (1-2d)^2)
    times, never fewer than once. Explicit counts override the formulas.
    """

    alpha: float = 2.0
    g: Callable[[float], float] = math.log2
    ell_group: int | None = None
    ell_individual: int | None = None

    def resolve(self, n: int, u: int, delta: float) -> tuple[int, int]:
        shrink = (1.0 - 2.0 * delta) ** 2
        group = self.ell_group
        if group is None:
            group = math.ceil(self.alpha * math.log2(n) / shrink)
        individual = self.ell_individual
        if individual is None:
            individual = math.ceil(self.alpha * math.log2(max(2.0, self.g(n) * u)) / shrink)
        return max(1, group), max(1, individual)


def noisy_oracle(truth: GroundTruth, channel: NoiseChannel,
                 rng: np.random.Generator) -> TestOracle:
    """True outcome XOR an independent Bernoulli(delta) flip per call."""
    clean = noiseless_oracle(truth)
    delta = channel.delta

    def answers(t_mask: int) -> bool:
        flip = delta > 0.0 and rng.random() < delta
        return clean(t_mask) != flip

    return answers


def bayes_update_noisy(post: Posterior, t, observed: bool, delta: float) -> Posterior:
    """Exact Bayes step: q'(e) ∝ q(e) * (1-delta if e's noiseless outcome on T
    matches the observation else delta)."""
    if not 0.0 <= delta < 0.5:
        raise ValueError(f"delta={delta} outside [0, 1/2)")
    t_mask = t if isinstance(t, int) else sum(1 << v for v in t)
    match = edge_outcomes(post.graph, t_mask) == bool(observed)
    if delta == 0.0:
        likelihood = match.astype(float)
    else:
        likelihood = np.where(match, 1.0 - delta, delta)
    return reweight(post, t_mask, observed, likelihood)


def majority_test(oracle: TestOracle, t_mask: int, ell: int) -> bool:
    """Query t exactly ell times and take the majority; even-split ties
    resolve positive."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    votes = sum(1 for _ in range(ell) if oracle(t_mask))
    return 2 * votes >= ell


def majority_error_probability(ell: int, delta: float) -> float:
    """Exact probability that the ell-repetition majority verdict is wrong.

    With ties resolving positive, a truly negative query errs when at least
    ceil(ell/2) flips occur, a truly positive one when more than ell/2 do;
    this returns the larger (the negative-side tail).
    """
    kmin = math.ceil(ell / 2)
    return sum(
        math.comb(ell, k) * delta ** k * (1.0 - delta) ** (ell - k)
        for k in range(kmin, ell + 1)
    )


def admissible_threshold(delta: float) -> float:
    """Smallest split constant the noisy analysis supports:
    1 - (1-d)^(1-d) * d^d."""
    if delta == 0.0:
        return 0.0
    return 1.0 - ((1.0 - delta) ** (1.0 - delta)) * (delta ** delta)


def run_noisy_adaptive(graph: Hypergraph, dist: EdgeDistribution, oracle: TestOracle,
                       config: AdaptiveConfig, channel: NoiseChannel,
                       schedule: RepetitionSchedule | None = None,
                       u: int | None = None,
                       max_physical_tests: int | None = None) -> Transcript:
    """Adaptive control flow under symmetric noise.

    Weight-window tests run once; the residual group test and the stage-2
    individual tests are repeated per the schedule with majority verdicts.
    The posterior absorbs every physical outcome through exact Bayes. The
    physical-test budget defaults to n, the asymptotic analysis' cap; desk
    runs usually need to raise it.
    """
    config.validate()
    validate_model(graph, dist)
    schedule = schedule or RepetitionSchedule()
    delta = channel.delta
    if config.c <= admissible_threshold(delta):
        warnings.warn(
            f"c={config.c} is at or below the admissible threshold "
            f"{admissible_threshold(delta):.4f} for delta={delta}; proceeding anyway",
            stacklevel=2,
        )
    n = graph.n
    ell_group, ell_individual = schedule.resolve(n, u if u else n, delta)
    cap = n if max_physical_tests is None else max_physical_tests

    member = graph.membership
    nonmember = 1.0 - member
    c = config.c
    post = prior_posterior(graph, dist)
    tr = Transcript()
    physical = 0
    group_id = 0

    def run_repeats(t_mask: int, ell: int, stage: str) -> bool | None:
        """Issue up to ell physical tests; None means the budget ran out."""
        nonlocal post, physical, group_id
        group_id += 1
        votes = 0
        for _ in range(ell):
            if physical >= cap:
                tr.halted = True
                return None
            outcome = oracle(t_mask)
            physical += 1
            post = bayes_update_noisy(post, t_mask, outcome, delta)
            tr.add(t_mask, outcome, stage, rep_group=group_id)
            votes += 1 if outcome else 0
        return 2 * votes >= ell

    while True:
        idx = certain_edge(post)
        if idx is not None:
            tr.result_edge = idx
            tr.result_nodes = graph.edge_nodes(idx)
            return tr

        active = node_marginals(post) > 0.0  # noise never zeroes a marginal
        s, found, _ = _split_scan(post.q, member, nonmember, active, c)
        t_mask = _mask_from_bool(active & ~s)

        if found:
            verdict = run_repeats(t_mask, 1, SPLIT)
            if verdict is None:
                return tr
            tr.informative += 1
            continue

        if t_mask:
            verdict = run_repeats(t_mask, ell_group, RESIDUAL)
            if verdict is None:
                return tr
            if verdict:
                tr.informative += 1
                continue

        if tr.mu_stage2 is None:
            tr.mu_stage2 = expected_infections(post)

        marg = node_marginals(post)
        positives = set(int(v) for v in np.flatnonzero(marg >= 1.0 - CERTAINTY_TOL))
        for v in _uncertain_nodes(marg, s):
            verdict = run_repeats(1 << v, ell_individual, INDIVIDUAL)
            if verdict is None:
                return tr
            if verdict:
                positives.add(v)
        tr.result_nodes = tuple(sorted(positives))
        tr.result_edge = certain_edge(post)
        return tr


def run_noisy_snagt(graph: Hypergraph, dist: EdgeDistribution, oracle: TestOracle,
                    config: SnagtConfig, channel: NoiseChannel,
                    alpha: float = 2.0, ell: int | None = None) -> Transcript:
    """Semi-non-adaptive run under noise: every scheduled random test is
    repeated ceil(alpha * log2(u*n) / (1-2d)^2) times and the majority verdict
    drives elimination. Schedule and repetition counts depend only on
    (n, u, seed), so the design stays target-independent; the test cap scales
    by the repetition factor."""
    config.validate()
    validate_model(graph, dist)
    if ell is None:
        shrink = (1.0 - 2.0 * channel.delta) ** 2
        ell = max(1, math.ceil(alpha * math.log2(config.u * graph.n) / shrink))
    return _snagt_run(graph, dist, oracle, config, repetitions=ell)
