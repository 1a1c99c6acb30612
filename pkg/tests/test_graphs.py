import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levelspec.errors import DimensionError, FormatError, GuardExceededError
from levelspec.graphs import (
    Graph,
    adjacency,
    are_isomorphic,
    complement,
    complete_graph,
    cycle_graph,
    disjoint_union,
    empty_graph,
    enumerate_graphs,
    is_controllable,
    is_cospectral,
    is_generalized_cospectral,
    path_graph,
    spectrum_key,
    star_graph,
    walk_matrix,
)
from levelspec.linalg import IntegerMatrix, determinant


@st.composite
def graphs(draw, max_order=7):
    n = draw(st.integers(1, max_order))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen)


def test_adjacency_of_small_families():
    assert adjacency(complete_graph(2)) == IntegerMatrix.from_rows([[0, 1], [1, 0]])
    assert adjacency(path_graph(3)) == IntegerMatrix.from_rows(
        [[0, 1, 0], [1, 0, 1], [0, 1, 0]]
    )
    assert star_graph(4).degree_sequence() == (4, 1, 1, 1, 1)
    assert cycle_graph(4).edge_count == 4
    assert disjoint_union(cycle_graph(4), empty_graph(1)).n == 5


@given(graphs())
@settings(max_examples=100, deadline=None)
def test_complement_is_an_involution(G):
    assert complement(complement(G)) == G
    n = G.n
    J_minus_I = IntegerMatrix.from_rows(
        [[int(i != j) for j in range(n)] for i in range(n)]
    )
    assert adjacency(complement(G)) == J_minus_I - adjacency(G)


def test_walk_matrix_of_the_path_on_three_vertices():
    report = walk_matrix(path_graph(3))
    assert report.W == IntegerMatrix.from_rows([[1, 1, 2], [1, 2, 2], [1, 1, 2]])
    assert not report.controllable
    assert report.d_n == 0


def test_single_vertex_is_controllable():
    report = walk_matrix(empty_graph(1))
    assert report.controllable and report.d_n == 1


def test_no_controllable_graph_below_six_vertices():
    for n in range(2, 6):
        for G in enumerate_graphs(n):
            report = walk_matrix(G)
            assert not report.controllable
            assert report.d_n == 0
            assert determinant(report.W) == 0
            assert is_controllable(G) is False


def test_controllability_matches_walk_determinant_on_six_vertices():
    controllable = 0
    for G in enumerate_graphs(6):
        report = walk_matrix(G)
        nonsingular = determinant(report.W) != 0
        assert report.controllable == (report.d_n != 0) == nonsingular
        assert is_controllable(G) == report.controllable
        controllable += report.controllable
    assert controllable == 5760


def test_isomorphism_under_relabelling():
    G = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (1, 4)])
    H = G.relabel([4, 2, 0, 1, 3])
    assert G != H
    assert are_isomorphic(G, H)
    assert not are_isomorphic(path_graph(3), complete_graph(3))
    assert not are_isomorphic(path_graph(3), path_graph(4))


def test_isomorphism_agrees_with_networkx_on_four_vertices():
    catalogue = list(enumerate_graphs(4))
    for G, H in itertools.product(catalogue, repeat=2):
        expected = nx.is_isomorphic(G.to_networkx(), H.to_networkx())
        assert are_isomorphic(G, H) == expected


def test_star_and_square_plus_vertex_are_cospectral_only():
    K14 = star_graph(4)
    C4K1 = disjoint_union(cycle_graph(4), empty_graph(1))
    assert spectrum_key(K14) == spectrum_key(C4K1)
    assert str(spectrum_key(K14)) == "x^5 - 4x^3"
    assert is_cospectral(K14, C4K1)
    assert not is_generalized_cospectral(K14, C4K1)
    assert not is_cospectral(K14, K14)


def test_enumerate_graphs_counts():
    assert len(list(enumerate_graphs(1))) == 1
    assert len(list(enumerate_graphs(3))) == 8
    five = list(enumerate_graphs(5))
    assert len(five) == 1024
    assert len(set(five)) == 1024


def test_guards():
    with pytest.raises(GuardExceededError):
        list(enumerate_graphs(9))
    with pytest.raises(GuardExceededError):
        are_isomorphic(path_graph(11), path_graph(11))
    assert are_isomorphic(path_graph(11), path_graph(11), max_order=11)


def test_graph_validation():
    with pytest.raises(FormatError):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(FormatError):
        Graph.from_edges(3, [(0, 3)])
    with pytest.raises(DimensionError):
        Graph.from_adjacency(IntegerMatrix.zeros(2, 3))
    with pytest.raises(FormatError):
        Graph.from_adjacency(IntegerMatrix.from_rows([[0, 1], [0, 0]]))
    with pytest.raises(FormatError):
        Graph.from_adjacency(IntegerMatrix.from_rows([[0, 2], [2, 0]]))


def test_networkx_bridge_keeps_labels():
    G = Graph.from_edges(4, [(0, 3), (1, 2)])
    nxg = G.to_networkx()
    assert sorted(nxg.edges()) == [(0, 3), (1, 2)]
    assert Graph.from_networkx(nxg) == G
    assert Graph.from_networkx(nx.cycle_graph(5)) == cycle_graph(5)
