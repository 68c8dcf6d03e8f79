from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import BudgetError, InputError
from app.hypergraph import (
    Hypergraph4,
    SplitHypergraph,
    build_split_hypergraph,
    default_ell,
    enforce_sparsity,
    greedy_linear,
    pairing_cells,
)


@st.composite
def hypergraphs(draw, max_order: int = 7):
    order = draw(st.integers(5, max_order))
    quads = list(combinations(range(order), 4))
    edges = draw(st.lists(st.sampled_from(quads), unique=True, max_size=8))
    return Hypergraph4(order, edges)


class TestHypergraph4:
    def test_rejects_bad_edges(self):
        with pytest.raises(InputError):
            Hypergraph4(5, [(0, 1, 2)])
        with pytest.raises(InputError):
            Hypergraph4(5, [(0, 1, 2, 5)])

    def test_linearity(self):
        assert Hypergraph4(8, [(0, 1, 2, 3), (0, 4, 5, 6)]).is_linear()
        assert not Hypergraph4(8, [(0, 1, 2, 3), (0, 1, 5, 6)]).is_linear()

    def test_split_edges(self):
        graph = Hypergraph4(8, [(0, 1, 4, 5), (0, 1, 2, 4)])
        assert graph.split_edges([0, 1, 2, 3]) == [(0, 1, 4, 5)]

    @settings(max_examples=80, deadline=None, derandomize=True)
    @given(graph=hypergraphs(), k=st.integers(4, 8), ell=st.integers(0, 3))
    def test_sparsity_matches_span(self, graph, k, ell):
        assert graph.is_sparse(k, ell) == (graph.max_span(k) <= ell)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(graph=hypergraphs(), ell=st.integers(1, 3))
    def test_enforced_sparsity(self, graph, ell):
        kept = enforce_sparsity(graph.edges, 6, ell)
        assert set(kept) <= set(graph.edges)
        assert Hypergraph4(graph.order, kept).is_sparse(6, ell)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(graph=hypergraphs())
    def test_greedy_linear_is_maximal(self, graph):
        kept = greedy_linear(graph.edges)
        assert Hypergraph4(graph.order, kept).is_linear()
        for edge in graph.edges:
            if edge not in kept:
                assert not Hypergraph4(graph.order, kept + [edge]).is_linear()


class TestSplitHypergraph:
    def test_pipeline_invariants(self):
        result = build_split_hypergraph(6, 4, 4, ell=2, seed=0)
        assert set(result.split) <= set(result.linear) <= set(result.surviving)
        assert len(result.side_a) == 6
        assert Hypergraph4(12, result.linear).is_linear()
        assert Hypergraph4(12, result.surviving).is_sparse(8, 2)
        side_a = set(result.side_a)
        assert all(sum(v in side_a for v in edge) == 2 for edge in result.split)

    def test_same_seed_same_result(self):
        assert build_split_hypergraph(6, 4, 4, seed=9) == build_split_hypergraph(6, 4, 4, seed=9)

    @pytest.mark.parametrize(
        "n,s,t,ell",
        [(6, 3, 4, None), (6, 5, 4, None), (3, 4, 4, None), (6, 4, 4, 0)],
    )
    def test_rejects_bad_parameters(self, n, s, t, ell):
        with pytest.raises(InputError):
            build_split_hypergraph(n, s, t, ell=ell)

    def test_sparsity_budget(self, monkeypatch):
        monkeypatch.setattr("app.hypergraph.SPARSITY_BUDGET", 1)
        with pytest.raises(BudgetError):
            build_split_hypergraph(6, 4, 4, ell=2, seed=0)

    def test_default_ell(self):
        assert default_ell(4, 4) == 2
        assert default_ell(8, 9) == 5

    def test_pairing_cells(self):
        split = SplitHypergraph(n=2, sampled=1, surviving=[(0, 1, 2, 3)], linear=[(0, 1, 2, 3)],
                                side_a=[0, 2], split=[(0, 1, 2, 3)], attempts=1)
        assert pairing_cells(split) == [((0, 0), (1, 1))]
