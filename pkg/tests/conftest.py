import numpy as np
import pytest

from hypergt.model import EdgeDistribution, GroundTruth, Hypergraph, noiseless_oracle


@pytest.fixture
def fig1():
    """Five-node worked example: edges {1,2,3}, {1,5}, {4,5} with masses
    .3/.2/.5 (node labels here are 0-based)."""
    graph = Hypergraph(5, [[0, 1, 2], [0, 4], [3, 4]])
    dist = EdgeDistribution([0.3, 0.2, 0.5])
    return graph, dist


def truth_for(graph, index):
    return GroundTruth(index, graph.edge_masks[index], graph.n)


def oracle_for(graph, index):
    return noiseless_oracle(truth_for(graph, index))


def random_model(rng, max_n=6, max_edges=10):
    """Seeded random small model: distinct edge masks, positive masses."""
    n = int(rng.integers(2, max_n + 1))
    count = int(rng.integers(2, min(max_edges, 2 ** n) + 1))
    masks = rng.choice(2 ** n, size=count, replace=False)
    weights = rng.integers(1, 20, size=count).astype(float)
    dist = EdgeDistribution(weights / weights.sum())
    return Hypergraph(n, [int(m) for m in masks]), dist
