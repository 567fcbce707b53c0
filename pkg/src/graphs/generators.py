from __future__ import annotations

import logging
from typing import List, Tuple

import networkx as nx
import numpy as np

from src.errors import InputError
from src.graphs.digraph import Digraph, complete_graph, from_undirected
from src.graphs.robustness import GrowthResult, grow, grow_preferential

logger = logging.getLogger(__name__)


def _clique_edges(nodes: List[int]) -> List[Tuple[int, int]]:
    return [(a, b) for k, a in enumerate(nodes) for b in nodes[k + 1:]]


def two_clique(n1: int, n2: int, F: int) -> Digraph:
    """Cliques X = 0..n1-1 and Y = n1..n1+n2-1; X node k links to Y nodes k..k+F-1 (cyclic)."""
    if F < 0 or n1 < 1 or n2 < 1:
        raise InputError(f"two-clique needs n1, n2 >= 1 and F >= 0 (got {n1}, {n2}, {F})")
    if F > n2 or n1 > n2:
        raise InputError(f"two-clique needs F <= n2 and n1 <= n2 (got n1={n1}, n2={n2}, F={F})")
    X = list(range(n1))
    Y = list(range(n1, n1 + n2))
    edges = _clique_edges(X) + _clique_edges(Y)
    for k in X:
        edges.extend((k, Y[(k + t) % n2]) for t in range(F))
    return from_undirected(edges, n=n1 + n2)


def fig1_graph() -> Digraph:
    return two_clique(4, 5, 2)


def fig2_graph() -> Digraph:
    """3-robust on 7 nodes: K5 on {0,1,2,4,6}, node 3 ~ {1,2,6}, node 5 ~ {0,1,4}."""
    edges = _clique_edges([0, 1, 2, 4, 6])
    edges += [(3, 1), (3, 2), (3, 6), (5, 0), (5, 1), (5, 4)]
    return from_undirected(edges, n=7)


def fig2_local_graph() -> Digraph:
    """3-robust on 7 nodes whose two outer nodes 5 and 6 never share a normal neighbour."""
    edges = _clique_edges([0, 1, 2, 3, 4])
    edges += [(5, 0), (5, 1), (5, 2), (5, 6), (6, 3), (6, 4)]
    return from_undirected(edges, n=7)


def star(n: int) -> Digraph:
    return from_undirected([(0, k) for k in range(1, n)], n=n)


def path(n: int) -> Digraph:
    return from_undirected([(k, k + 1) for k in range(n - 1)], n=n)


def random_digraph(n: int, p: float, seed: int | None = None, directed: bool = True) -> Digraph:
    return Digraph.from_networkx(nx.gnp_random_graph(n, p, seed=seed, directed=directed))


def random_robust_graph(n: int, r: int, s: int, seed: int | np.random.Generator | None,
                        attachments: int | None = None) -> GrowthResult:
    """Grow a graph of n nodes from K_{2r-1} (robust for every s) by preferential attachment."""
    base = max(2 * r - 1, r + s - 1, 1)
    if n < base:
        raise InputError(f"need n >= {base} to grow an ({r},{s})-robust graph, got {n}")
    return grow_preferential(complete_graph(base), r, s, n - base, seed, attachments=attachments)


def hub_graph(n_body: int, r: int, s: int, seed: int | np.random.Generator | None) -> Digraph:
    """Grown (r,s)-robust body plus one hub wired to every other node (hub id = n_body)."""
    body = random_robust_graph(n_body, r, s, seed, attachments=r + s - 1).graph
    return grow(body, r, s, list(body.nodes), check_seed=False)
