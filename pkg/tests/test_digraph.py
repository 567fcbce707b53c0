from __future__ import annotations

import pytest
from hypothesis import given

from src.errors import InputError
from src.graphs.digraph import (
    Digraph,
    SwitchingSchedule,
    complete_graph,
    format_edge_list,
    from_undirected,
    graph_at,
    in_neighbors,
    inclusive_neighbors,
    parse_edge_list,
    to_dot,
)
from tests.conftest import digraphs


def test_in_neighbors_of_triangle():
    assert in_neighbors(complete_graph(3), 0) == {1, 2}


def test_isolated_nodes_have_no_neighbors():
    g = Digraph(3)
    assert in_neighbors(g, 1) == frozenset()
    assert inclusive_neighbors(g, 1) == {1}


def test_unknown_node_is_rejected():
    with pytest.raises(InputError):
        complete_graph(3).in_neighbors(3)


def test_two_clique_degrees(fig1):
    for k in range(4):
        nbrs = fig1.in_neighbors(k)
        assert len(nbrs & set(range(4))) == 3
        assert len(nbrs - set(range(4))) == 2
    assert fig1.is_symmetric()
    assert fig1.n == 9


def test_reconstructed_graph_shape(fig2):
    assert fig2.n == 7
    assert fig2.is_symmetric()
    assert len(fig2.edges) == 32


@given(digraphs())
def test_node_never_its_own_in_neighbor(g):
    for i in g.nodes:
        assert i not in in_neighbors(g, i)
        assert i in inclusive_neighbors(g, i)


def test_from_undirected_builds_both_arcs():
    g = from_undirected([(0, 1)])
    assert g.edges == {(0, 1), (1, 0)}
    assert len(from_undirected([(a, b) for a in range(4) for b in range(a + 1, 4)]).edges) == 12


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (1, 0)]])
def test_from_undirected_rejects_bad_edges(edges):
    with pytest.raises(InputError):
        from_undirected(edges)


def test_arc_endpoint_out_of_range():
    with pytest.raises(InputError):
        Digraph(2, frozenset({(0, 2)}))


def test_from_arcs_rejects_duplicates():
    with pytest.raises(InputError):
        Digraph.from_arcs(2, [(0, 1), (0, 1)])


def test_add_node_symmetric_and_directed():
    g = complete_graph(3)
    sym = g.add_node([0, 1])
    assert sym.n == 4
    assert sym.in_neighbors(3) == {0, 1}
    assert 3 in sym.in_neighbors(0)
    one_way = g.add_node([2], symmetric=False)
    assert one_way.in_neighbors(3) == {2}
    assert 3 not in one_way.in_neighbors(2)


def test_schedule_lookup_uses_half_open_segments():
    g0, g1 = complete_graph(3), Digraph(3)
    s = SwitchingSchedule(((0.0, g0), (5.0, g1)))
    assert graph_at(s, 0.0) is g0
    assert graph_at(s, 4.999) is g0
    assert graph_at(s, 5.0) is g1
    assert graph_at(s, 1e9) is g1
    with pytest.raises(InputError):
        s.graph_at(-0.5)


def test_schedule_validation():
    g = complete_graph(3)
    with pytest.raises(InputError):
        SwitchingSchedule(((1.0, g),))
    with pytest.raises(InputError):
        SwitchingSchedule(((0.0, g), (0.0, g)))
    with pytest.raises(InputError):
        SwitchingSchedule(((0.0, g), (2.0, complete_graph(4))))


def test_schedule_dwell_and_bounds():
    g = complete_graph(3)
    s = SwitchingSchedule(((0.0, g), (2.0, g), (3.0, g)), dwell=1.0)
    assert s.dwell_ok()
    assert not s.dwell_ok(1.5)
    assert s.min_segment_length() == 1.0
    assert list(s.segment_bounds(10.0))[-1] == (3.0, 10.0, g)


def test_parse_edge_list_mixed_lines():
    text = "# demo\nnodes 5\n0 1\n1 -> 2  # one way\n\n3 2\n"
    g = parse_edge_list(text)
    assert g.n == 5
    assert g.edges == {(0, 1), (1, 0), (1, 2), (3, 2), (2, 3)}


def test_parse_edge_list_reports_line_numbers():
    with pytest.raises(InputError, match="line 3"):
        parse_edge_list("0 1\n1 2\n2 x\n")
    with pytest.raises(InputError, match="line 2"):
        parse_edge_list("0 1\n1 0\n")
    with pytest.raises(InputError, match="self-loop"):
        parse_edge_list("4 4\n")


@given(digraphs(min_nodes=0))
def test_edge_list_text_is_lossless(g):
    assert parse_edge_list(format_edge_list(g)) == g


def test_dot_marks_adversaries_and_symmetric_pairs():
    g = from_undirected([(0, 1)], n=3).with_arc(1, 2)
    dot = to_dot(g, adversaries=[2])
    assert "0 -> 1 [dir=both];" in dot
    assert "1 -> 2;" in dot
    assert '2 [style=filled, fillcolor="#ef5350"];' in dot


@given(digraphs(min_nodes=0))
def test_networkx_bridge(g):
    assert Digraph.from_networkx(g.to_networkx()) == g
