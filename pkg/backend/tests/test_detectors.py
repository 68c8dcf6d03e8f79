from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.energy.detectors import find_even_cycle, find_subdivision_Kt, find_theta
from app.errors import InputError


def subdivided_clique(t: int) -> nx.Graph:
    graph = nx.Graph()
    for k, (x, y) in enumerate(combinations(range(t), 2)):
        graph.add_edge(x, 100 + k)
        graph.add_edge(y, 100 + k)
    return graph


def theta_graph(length: int, paths: int) -> nx.Graph:
    """Vertices 0 and 1 joined by `paths` disjoint paths of `length` edges, inner vertices from 10"""
    graph = nx.Graph()
    for p in range(paths):
        inner = [10 * (p + 1) + k for k in range(length - 1)]
        nx.add_path(graph, [0] + inner + [1])
    return graph


def assert_is_cycle(graph, result, length):
    assert result.status == "found"
    assert len(result.witness_vertices) == length == len(set(result.witness_vertices))
    assert all(graph.has_edge(u, v) for u, v in result.witness_edges)


class TestEvenCycles:
    def test_hexagon(self):
        graph = nx.cycle_graph(6)
        assert_is_cycle(graph, find_even_cycle(graph, 6), 6)
        assert find_even_cycle(graph, 4).status == "none"

    def test_square_starts_at_smallest_vertex(self):
        graph = nx.complete_bipartite_graph(2, 2)
        result = find_even_cycle(graph, 4)
        assert_is_cycle(graph, result, 4)
        assert result.witness_vertices[0] == 0

    @pytest.mark.parametrize("length", [4, 6])
    def test_k33(self, length):
        graph = nx.complete_bipartite_graph(3, 3)
        assert_is_cycle(graph, find_even_cycle(graph, length), length)

    def test_budget_exhaustion(self):
        result = find_even_cycle(nx.complete_bipartite_graph(3, 3), 6, budget=1)
        assert result.status == "unknown"

    def test_odd_length_rejected(self):
        with pytest.raises(InputError):
            find_even_cycle(nx.cycle_graph(5), 5)

    @settings(max_examples=80, deadline=None, derandomize=True)
    @given(
        left=st.integers(2, 5),
        right=st.integers(2, 5),
        data=st.data(),
    )
    def test_square_detection_matches_common_neighbors(self, left, right, data):
        cells = [(i, 10 + j) for i in range(left) for j in range(right)]
        edges = data.draw(st.lists(st.sampled_from(cells), unique=True))
        graph = nx.Graph()
        graph.add_nodes_from(range(left))
        graph.add_nodes_from(range(10, 10 + right))
        graph.add_edges_from(edges)
        expected = any(
            len(set(graph[u]) & set(graph[v])) >= 2 for u, v in combinations(range(left), 2)
        )
        assert (find_even_cycle(graph, 4).status == "found") == expected


class TestTheta:
    def test_k23_is_theta_2_3(self):
        graph = nx.complete_bipartite_graph(2, 3)
        result = find_theta(graph, 2, 3)
        assert result.status == "found"
        assert set(result.witness_vertices[:2]) == {0, 1}
        assert len(result.witness_edges) == 6

    def test_hexagon_is_theta_3_2(self):
        result = find_theta(nx.cycle_graph(6), 3, 2)
        assert result.status == "found"
        assert len(result.witness_edges) == 6

    def test_hexagon_has_no_square(self):
        assert find_theta(nx.cycle_graph(6), 2, 2).status == "none"

    def test_theta_3_3(self):
        graph = theta_graph(3, 3)
        result = find_theta(graph, 3, 3)
        assert result.status == "found"
        assert result.witness_vertices[:2] == [0, 1]
        assert len(result.witness_edges) == 9
        assert {frozenset(edge) for edge in result.witness_edges} == {frozenset(edge) for edge in graph.edges}

    def test_theta_3_3_needs_three_paths(self):
        graph = theta_graph(3, 3)
        graph.remove_edge(0, 10)
        assert find_theta(graph, 3, 3).status == "none"

    def test_parameters(self):
        with pytest.raises(InputError):
            find_theta(nx.cycle_graph(6), 1, 2)


class TestTrees:
    @pytest.mark.parametrize("length", [4, 6, 8])
    def test_no_even_cycle(self, length):
        assert find_even_cycle(nx.balanced_tree(2, 4), length).status == "none"

    @pytest.mark.parametrize("a,b", [(2, 2), (3, 2), (3, 3)])
    def test_no_theta(self, a, b):
        assert find_theta(nx.balanced_tree(2, 4), a, b).status == "none"


class TestSubdivision:
    def test_subdivided_k4(self):
        graph = subdivided_clique(4)
        result = find_subdivision_Kt(graph, 4)
        assert result.status == "found"
        assert result.witness_vertices[:4] == [0, 1, 2, 3]
        assert len(result.witness_edges) == 12
        assert all(graph.has_edge(u, v) for u, v in result.witness_edges)

    def test_k33_contains_subdivided_triangle(self):
        assert find_subdivision_Kt(nx.complete_bipartite_graph(3, 3), 3).status == "found"

    def test_star_has_none(self):
        assert find_subdivision_Kt(nx.star_graph(5), 3).status == "none"

    def test_order(self):
        with pytest.raises(InputError):
            find_subdivision_Kt(nx.star_graph(5), 2)
