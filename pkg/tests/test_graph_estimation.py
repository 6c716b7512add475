import logging

import numpy as np
import pytest
from joblib import parallel_config

from errors import DomainError
from graph_estimation import neighborhood_graph, node_cutoff
from monte_carlo import bidiagonal_precision, replication_rng, sample_from_precision
from schemas import Edge, EdgeList, GraphConfig


@pytest.fixture
def correlated(rng):
    """Columns 0 and 2 nearly equal; 1 and 3 independent noise."""
    X = rng.standard_normal((200, 4))
    X[:, 2] = X[:, 0] + 0.1 * rng.standard_normal(200)
    return X


def test_correlated_pair_gives_one_edge(correlated):
    graph = neighborhood_graph(correlated, GraphConfig(alpha=0.001))
    assert graph.pairs() == {(0, 2)}
    edge = graph.edges[0]
    assert edge.p_ij is not None and edge.p_ji is not None
    assert graph.n_nodes == 4


def test_alpha_zero_gives_empty_graph(correlated):
    assert neighborhood_graph(correlated, GraphConfig(alpha=0.0)).edges == []


def test_and_rule_is_a_subset_of_or_rule(rng):
    X = sample_from_precision(bidiagonal_precision(8, 0.3), 150, rng)
    either = neighborhood_graph(X, GraphConfig(alpha=0.2, edge_rule="or")).pairs()
    both = neighborhood_graph(X, GraphConfig(alpha=0.2, edge_rule="and")).pairs()
    assert both <= either


def test_or_rule_consistency(rng):
    X = sample_from_precision(bidiagonal_precision(8, 0.3), 150, rng)
    for edge in neighborhood_graph(X, GraphConfig(alpha=0.2)).edges:
        assert edge.i < edge.j
        assert edge.p_ij is not None or edge.p_ji is not None


def test_node_subset(correlated):
    graph = neighborhood_graph(correlated, GraphConfig(alpha=0.001), subset=[2, 0])
    assert graph.pairs() == {(0, 2)}
    assert graph.n_nodes == 2


def test_node_cutoff():
    assert node_cutoff(GraphConfig(alpha=0.05), 10) == pytest.approx(0.005)
    assert node_cutoff(GraphConfig(alpha=0.05, bonferroni=False), 10) == 0.05


def test_constant_node_is_skipped(correlated, caplog):
    X = np.column_stack([correlated, np.full(200, 2.0)])
    with caplog.at_level(logging.WARNING, logger="graph_estimation"):
        graph = neighborhood_graph(X, GraphConfig(alpha=0.001))
    assert "constant" in caplog.text
    assert all(4 not in pair for pair in graph.pairs())


def test_path_graph_recovery():
    X = sample_from_precision(bidiagonal_precision(6, 0.25), 5000, replication_rng(1, 0))
    graph = neighborhood_graph(X, GraphConfig(alpha=0.01))
    assert graph.pairs() == {(i, i + 1) for i in range(5)}


def test_result_does_not_depend_on_workers(correlated):
    with parallel_config(backend="threading"):
        serial = neighborhood_graph(correlated, GraphConfig(alpha=0.05), n_jobs=1)
        threaded = neighborhood_graph(correlated, GraphConfig(alpha=0.05), n_jobs=3)
    assert serial.edges == threaded.edges


def test_repeated_variant_runs(correlated):
    graph = neighborhood_graph(correlated, GraphConfig(alpha=0.001, repeated=True, nmax=2))
    assert (0, 2) in graph.pairs()


@pytest.mark.parametrize("subset", [[0], [0, 9]])
def test_bad_node_sets(correlated, subset):
    with pytest.raises(DomainError):
        neighborhood_graph(correlated, subset=subset)


def test_edge_file_format():
    edges = EdgeList(n_nodes=3, edges=[Edge(i=0, j=2, p_ij=1.5e-9, p_ji=None), Edge(i=1, j=2, p_ij=0.25, p_ji=0.5)])
    assert edges.to_text() == "1 3 1.5e-09 NA\n2 3 0.25 0.5\n"


def test_edge_requires_ordered_pair():
    with pytest.raises(ValueError):
        Edge(i=3, j=1)


def test_repeated_vmax_bounds_neighbors_per_node(correlated):
    cfg = GraphConfig(alpha=1.0, bonferroni=False, repeated=True, nmax=5, vmax=1)
    graph = neighborhood_graph(correlated, cfg)
    directions = sum((edge.p_ij is not None) + (edge.p_ji is not None) for edge in graph.edges)
    assert 0 < directions <= graph.n_nodes
