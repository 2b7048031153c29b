import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import oracle_for, random_model, truth_for
from hypergt.errors import (
    DuplicateEdge,
    ModelError,
    NegativeProbability,
    NodeOutOfRange,
    NotNormalized,
    ZeroSurvivorMass,
)
from hypergt.model import (
    EdgeDistribution,
    Hypergraph,
    condition_on_test,
    edge_entropy,
    edge_set,
    expected_infections,
    load_model,
    node_marginal,
    node_marginals,
    prior_posterior,
    save_model,
    set_weight,
    validate_model,
)
from hypergt.oracle import direct_posterior


class TestValidation:
    def test_fig1_is_valid(self, fig1):
        validate_model(*fig1)

    def test_not_normalized(self):
        g = Hypergraph(3, [[0], [1], [2]])
        with pytest.raises(NotNormalized):
            validate_model(g, EdgeDistribution([0.5, 0.5, 0.5]))

    def test_node_out_of_range(self):
        g = Hypergraph(3, [[0], [3]])
        with pytest.raises(NodeOutOfRange):
            validate_model(g, EdgeDistribution([0.5, 0.5]))

    def test_duplicate_edge(self):
        g = Hypergraph(3, [[0, 1], [1, 0]])
        with pytest.raises(DuplicateEdge):
            validate_model(g, EdgeDistribution([0.5, 0.5]))

    def test_negative_probability(self):
        g = Hypergraph(2, [[0], [1]])
        with pytest.raises(NegativeProbability):
            validate_model(g, EdgeDistribution([1.5, -0.5]))

    def test_length_mismatch(self):
        g = Hypergraph(2, [[0], [1]])
        with pytest.raises(ModelError):
            validate_model(g, EdgeDistribution([1.0]))

    def test_zero_mass_edges_are_accepted(self):
        g = Hypergraph(2, [[0], [1]])
        validate_model(g, EdgeDistribution([1.0, 0.0]))


class TestEdgeSet:
    def test_fig1_subset(self, fig1):
        graph, _ = fig1
        assert edge_set(graph, [0, 1, 2, 4]) == (0, 1)

    def test_whole_vertex_set(self, fig1):
        graph, _ = fig1
        assert edge_set(graph, range(5)) == (0, 1, 2)

    def test_empty_set(self, fig1):
        graph, _ = fig1
        assert edge_set(graph, []) == ()

    def test_empty_edge_belongs_to_every_set(self):
        g = Hypergraph(3, [[], [0, 1]])
        assert edge_set(g, []) == (0,)
        assert edge_set(g, [2]) == (0,)


class TestWeightsAndMarginals:
    def test_fig1_weight(self, fig1):
        post = prior_posterior(*fig1)
        assert set_weight(post, [0, 1, 2, 4]) == pytest.approx(0.5, abs=1e-12)

    def test_full_set_weight_is_one(self, fig1):
        post = prior_posterior(*fig1)
        assert set_weight(post, range(5)) == pytest.approx(1.0, abs=1e-12)

    def test_weight_complement_of_v5(self, fig1):
        post = prior_posterior(*fig1)
        assert set_weight(post, [0, 1, 2, 3]) == pytest.approx(0.3, abs=1e-12)

    def test_fig1_marginals(self, fig1):
        post = prior_posterior(*fig1)
        assert node_marginal(post, 4) == pytest.approx(0.7, abs=1e-12)
        assert [round(x, 10) for x in node_marginals(post)] == [0.5, 0.3, 0.3, 0.5, 0.7]

    def test_isolated_node_marginal_is_zero(self):
        g = Hypergraph(3, [[0], [1]])
        post = prior_posterior(g, EdgeDistribution([0.4, 0.6]))
        assert node_marginal(post, 2) == 0.0

    def test_marginal_after_positive_test(self, fig1):
        post = condition_on_test(prior_posterior(*fig1), [1, 3], True)
        assert node_marginal(post, 3) == pytest.approx(0.625, abs=1e-12)


class TestExpectedInfections:
    def test_fig1(self, fig1):
        assert expected_infections(prior_posterior(*fig1)) == pytest.approx(2.3, abs=1e-12)

    def test_point_mass(self):
        g = Hypergraph(5, [[0, 2, 4], [1]])
        post = prior_posterior(g, EdgeDistribution([1.0, 0.0]))
        assert expected_infections(post) == 3.0

    def test_nested_n4(self):
        from hypergt.builders import build_nested

        g, d = build_nested(4)
        assert expected_infections(prior_posterior(g, d)) == pytest.approx(2.5, abs=1e-12)


class TestEntropy:
    def test_uniform_eight(self):
        assert edge_entropy(np.full(8, 0.125)) == pytest.approx(3.0, abs=1e-12)

    def test_point_mass(self):
        assert edge_entropy(np.array([1.0, 0.0])) == 0.0

    def test_fig1(self, fig1):
        assert edge_entropy(fig1[1]) == pytest.approx(1.48548, abs=1e-5)

    @given(st.lists(st.integers(1, 30), min_size=2, max_size=8), st.randoms())
    def test_permutation_invariant_and_below_uniform(self, weights, pyrandom):
        p = np.array(weights, float)
        p /= p.sum()
        shuffled = list(p)
        pyrandom.shuffle(shuffled)
        assert edge_entropy(np.array(shuffled)) == pytest.approx(edge_entropy(p), abs=1e-9)
        assert edge_entropy(p) <= math.log2(len(p)) + 1e-12

    def test_maximal_exactly_at_uniform(self):
        assert edge_entropy(np.full(6, 1 / 6)) == pytest.approx(math.log2(6), abs=1e-12)
        assert edge_entropy(np.array([0.3, 0.2, 0.2, 0.1, 0.1, 0.1])) < math.log2(6)


class TestConditioning:
    def test_fig1_positive(self, fig1):
        post = condition_on_test(prior_posterior(*fig1), [1, 3], True)
        assert np.allclose(post.q, [0.375, 0.0, 0.625], atol=1e-12)
        assert post.q[1] == 0.0
        assert len(post.transcript) == 1

    def test_fig1_negative_single_node(self, fig1):
        post = condition_on_test(prior_posterior(*fig1), [0], False)
        assert np.allclose(post.q, [0.0, 0.0, 1.0], atol=0)

    def test_fig1_positive_v5(self, fig1):
        post = condition_on_test(prior_posterior(*fig1), [4], True)
        assert np.allclose(post.q, [0.0, 2 / 7, 5 / 7], atol=1e-12)

    def test_inconsistent_observation_raises(self, fig1):
        post = condition_on_test(prior_posterior(*fig1), [0], False)
        with pytest.raises(ZeroSurvivorMass):
            condition_on_test(post, [0], True)

    def test_empty_edge_always_negative(self):
        g = Hypergraph(2, [[], [0, 1]])
        post = prior_posterior(g, EdgeDistribution([0.5, 0.5]))
        post = condition_on_test(post, [0, 1], False)
        assert post.q[0] == 1.0


class TestPosteriorProperties:
    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 10_000))
    def test_weight_complement_identity(self, seed):
        """w(V minus v) + q_v = 1 for every node, any posterior."""
        rng = np.random.default_rng(seed)
        graph, dist = random_model(rng)
        post = prior_posterior(graph, dist)
        truth = truth_for(graph, int(rng.choice(len(dist.probs), p=dist.probs)))
        oracle = oracle_for(graph, truth.target)
        for _ in range(int(rng.integers(0, 4))):
            t = int(rng.integers(1, 2 ** graph.n))
            post = condition_on_test(post, t, oracle(t))
        full = (1 << graph.n) - 1
        for v in range(graph.n):
            lhs = set_weight(post, full & ~(1 << v))
            assert lhs == pytest.approx(1.0 - node_marginal(post, v), abs=1e-9)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 10_000))
    def test_truth_survives_and_mass_normalizes(self, seed):
        rng = np.random.default_rng(seed)
        graph, dist = random_model(rng)
        target = int(rng.choice(len(dist.probs), p=dist.probs))
        oracle = oracle_for(graph, target)
        post = prior_posterior(graph, dist)
        for _ in range(5):
            t = int(rng.integers(0, 2 ** graph.n))
            post = condition_on_test(post, t, oracle(t))
            assert post.q[target] > 0.0
            assert post.q.sum() == pytest.approx(1.0, abs=1e-9)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 10_000))
    def test_sequential_equals_direct(self, seed):
        rng = np.random.default_rng(seed)
        graph, dist = random_model(rng)
        target = int(rng.choice(len(dist.probs), p=dist.probs))
        oracle = oracle_for(graph, target)
        post = prior_posterior(graph, dist)
        transcript = []
        for _ in range(int(rng.integers(1, 6))):
            t = int(rng.integers(0, 2 ** graph.n))
            r = oracle(t)
            transcript.append((t, r))
            post = condition_on_test(post, t, r)
        direct = direct_posterior(graph, dist, transcript)
        assert np.allclose(post.q, direct.q, atol=1e-9)


class TestModelFile:
    def test_round_trip_is_value_exact(self, tmp_path, fig1):
        graph, dist = fig1
        odd = EdgeDistribution(np.array([1 / 3, 1 / 7, 1 - 1 / 3 - 1 / 7]))
        path = tmp_path / "model.json"
        save_model(str(path), graph, odd)
        g2, d2 = load_model(str(path))
        assert g2.n == graph.n
        assert g2.edge_masks == graph.edge_masks
        assert all(a == b for a, b in zip(d2.probs, odd.probs))  # bitwise equal

    def test_load_validates(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 2, "edges": [[0], [1]], "probs": [0.9, 0.9]}')
        with pytest.raises(NotNormalized):
            load_model(str(path))
