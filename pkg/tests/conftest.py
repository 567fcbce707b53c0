from __future__ import annotations

import pytest
from hypothesis import strategies as st

from src.graphs.digraph import Digraph, complete_graph
from src.graphs.generators import fig1_graph, fig2_graph, fig2_local_graph


@pytest.fixture
def fig1() -> Digraph:
    return fig1_graph()


@pytest.fixture
def fig2() -> Digraph:
    return fig2_graph()


@pytest.fixture
def fig2_local() -> Digraph:
    return fig2_local_graph()


@pytest.fixture
def k5() -> Digraph:
    return complete_graph(5)


@st.composite
def digraphs(draw, min_nodes: int = 1, max_nodes: int = 6, symmetric: bool = False) -> Digraph:
    """Small random digraphs for exhaustive cross-checks."""
    n = draw(st.integers(min_value=min_nodes, max_value=max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(n) if u < v] if symmetric else [
        (u, v) for u in range(n) for v in range(n) if u != v]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    arcs = set(chosen)
    if symmetric:
        arcs |= {(v, u) for u, v in chosen}
    return Digraph(n, frozenset(arcs))
