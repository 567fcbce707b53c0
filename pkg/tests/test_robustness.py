from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.stats import chisquare

from src.errors import CapacityError, InputError
from src.graphs.digraph import Digraph, complete_graph, from_undirected
from src.graphs.generators import random_robust_graph, star
from src.graphs.robustness import (
    grow,
    grow_preferential,
    is_r_reachable,
    is_r_robust,
    is_rs_reachable,
    is_rs_robust,
    maximal_robustness,
    min_in_degree,
    min_pair_reach,
    pair_satisfies,
    preferential_targets,
    reach_count,
)
from tests.conftest import digraphs


def brute_force_robust(g: Digraph, r: int, s: int) -> bool:
    """Walk all 3^n labelings: 1 puts a node in S1, 2 puts it in S2."""
    for labels in itertools.product((0, 1, 2), repeat=g.n):
        s1 = {i for i, lab in enumerate(labels) if lab == 1}
        s2 = {i for i, lab in enumerate(labels) if lab == 2}
        if s1 and s2 and not pair_satisfies(g, s1, s2, r, s):
            return False
    return True


def brute_force_witness(g: Digraph, r: int, s: int):
    """Lexicographically smallest (sorted S1, sorted S2) violating pair, or None."""
    found = None
    for labels in itertools.product((0, 1, 2), repeat=g.n):
        s1 = [i for i, lab in enumerate(labels) if lab == 1]
        s2 = [i for i, lab in enumerate(labels) if lab == 2]
        if s1 and s2 and not pair_satisfies(g, s1, s2, r, s):
            if found is None or (s1, s2) < found:
                found = (s1, s2)
    return None if found is None else (frozenset(found[0]), frozenset(found[1]))


# ---------- Set-level counts ----------
def test_reach_count_examples(fig2, k5):
    # only node 1 has three neighbours outside {1, 3}
    assert reach_count(fig2, {1, 3}, 3) == 1
    assert reach_count(fig2, {1, 3}, 0) == 2
    assert reach_count(k5, {0, 1}, 3) == 2


def test_reach_count_rejects_empty_and_unknown(k5):
    with pytest.raises(InputError):
        reach_count(k5, set(), 1)
    with pytest.raises(InputError):
        reach_count(k5, {7}, 1)


def test_reachability_predicates(fig1, k5):
    X = set(range(4))
    assert not is_r_reachable(fig1, X, 3)
    assert is_r_reachable(fig1, X, 2)
    assert is_rs_reachable(fig1, X, 2, 4)
    assert is_r_reachable(k5, {0}, 4)


def test_pair_satisfies_rejects_overlap(k5):
    with pytest.raises(InputError):
        pair_satisfies(k5, {0, 1}, {1, 2}, 1, 1)


# ---------- Exhaustive checker ----------
def test_two_clique_is_two_but_not_three_robust(fig1):
    assert is_r_robust(fig1, 2).verdict
    cert = is_r_robust(fig1, 3)
    assert not cert.verdict
    assert cert.witness == (frozenset(range(4)), frozenset(range(4, 9)))
    assert cert.reach == (0, 0)
    assert cert.revalidate(fig1)
    assert maximal_robustness(fig1) == (2, 9)
    assert min_in_degree(fig1) == 5


def test_reconstructed_seven_node_graph(fig2):
    assert is_rs_robust(fig2, 3, 1).verdict
    assert not pair_satisfies(fig2, {0, 2, 4, 5, 6}, {1, 3}, 3, 2)
    assert not pair_satisfies(fig2, {0, 4, 5}, {1, 2, 3}, 2, 5)
    for r, s in ((3, 2), (2, 5)):
        cert = is_rs_robust(fig2, r, s)
        assert not cert.verdict
        assert cert.revalidate(fig2)
        assert cert.witness == brute_force_witness(fig2, r, s)
    assert maximal_robustness(fig2) == (3, 1)


def test_seven_node_witness_is_lexicographically_first(fig2):
    cert = is_rs_robust(fig2, 3, 2)
    assert cert.witness == (frozenset({0, 1, 2, 3, 6}), frozenset({4, 5}))
    assert cert.reach == (0, 1)


def test_complete_graph_on_five(k5):
    assert is_rs_robust(k5, 3, 3).verdict
    assert not is_r_robust(k5, 4).verdict
    assert maximal_robustness(k5) == (3, 5)
    assert min_pair_reach(k5, 3) is None


def test_empty_graph_is_not_one_robust():
    cert = is_r_robust(Digraph(3), 1)
    assert not cert.verdict
    assert cert.revalidate(Digraph(3))


def test_degenerate_sizes():
    assert is_rs_robust(Digraph(0), 0, 1).verdict
    assert not is_rs_robust(Digraph(0), 1, 1).verdict
    assert is_rs_robust(Digraph(1), 1, 1).verdict
    assert not is_rs_robust(Digraph(1), 2, 1).verdict
    assert maximal_robustness(Digraph(1)) == (1, 1)


def test_argument_ranges(k5):
    with pytest.raises(InputError):
        is_rs_robust(k5, -1, 1)
    with pytest.raises(InputError):
        is_rs_robust(k5, 1, 0)
    with pytest.raises(InputError):
        is_rs_robust(k5, 1, 6)


def test_capacity_limit():
    with pytest.raises(CapacityError, match="3\\^16"):
        is_r_robust(complete_graph(16), 2)
    with pytest.raises(CapacityError):
        is_r_robust(complete_graph(4), 2, limit=3)


@settings(max_examples=40, deadline=None)
@given(digraphs(min_nodes=2, max_nodes=5))
def test_checker_matches_brute_force(g):
    for r in range(g.n + 1):
        for s in range(1, g.n + 1):
            assert is_rs_robust(g, r, s).verdict == brute_force_robust(g, r, s)


@settings(max_examples=60, deadline=None)
@given(digraphs(min_nodes=2, max_nodes=6))
def test_monotone_in_r_and_s(g):
    table = {(r, s): is_rs_robust(g, r, s).verdict for r in range(g.n + 1) for s in range(1, g.n + 1)}
    for (r, s), ok in table.items():
        if ok:
            assert all(table[(r2, s2)] for r2 in range(r + 1) for s2 in range(1, s + 1))


@settings(max_examples=60, deadline=None)
@given(digraphs(min_nodes=2, max_nodes=6), st.integers(min_value=0, max_value=4))
def test_r_robust_is_rs_with_s_one_and_witnesses_hold(g, r):
    cert = is_r_robust(g, r)
    assert cert.verdict == is_rs_robust(g, r, 1).verdict
    if not cert.verdict:
        assert cert.revalidate(g)


@settings(max_examples=40, deadline=None)
@given(digraphs(min_nodes=2, max_nodes=5), st.integers(min_value=0, max_value=3), st.data())
def test_witness_matches_lexicographic_search(g, r, data):
    s = data.draw(st.integers(min_value=1, max_value=g.n))
    assert is_rs_robust(g, r, s).witness == brute_force_witness(g, r, s)


@settings(max_examples=40, deadline=None)
@given(digraphs(min_nodes=2, max_nodes=6), st.data())
def test_adding_an_arc_keeps_robustness(g, data):
    missing = [(j, i) for j in g.nodes for i in g.nodes if j != i and (j, i) not in g.edges]
    assume(missing)
    j, i = data.draw(st.sampled_from(missing))
    bigger = g.with_arc(j, i)
    for r in range(1, 4):
        for s in range(1, g.n + 1):
            if is_rs_robust(g, r, s).verdict:
                assert is_rs_robust(bigger, r, s).verdict


@settings(max_examples=60, deadline=None)
@given(digraphs(min_nodes=2, max_nodes=6), st.integers(min_value=1, max_value=2))
def test_robust_graphs_have_in_degree_at_least_f_plus_one(g, F):
    if is_rs_robust(g, F + 1, min(F + 1, g.n)).verdict:
        assert min_in_degree(g) >= F + 1


def test_two_two_robust_graph_with_in_degree_two():
    # K4 minus one edge: (2,2)-robust although two nodes have only two neighbours
    g = from_undirected([(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
    assert is_rs_robust(g, 2, 2).verdict
    assert min_in_degree(g) == 2


# ---------- Growth ----------
def test_grow_rejects_bad_targets(k5):
    with pytest.raises(InputError):
        grow(k5, 3, 2, [0, 1, 2])
    with pytest.raises(InputError):
        grow(k5, 3, 2, [0, 1, 1, 2])
    with pytest.raises(InputError):
        grow(k5, 3, 2, [0, 1, 2, 9])


def test_grow_rejects_unrobust_seed():
    with pytest.raises(InputError):
        grow(Digraph(3), 1, 1, [0])


def test_grow_keeps_seed_robustness(k5):
    g = grow(k5, 3, 2, [0, 1, 2, 3])
    assert g.n == 6
    assert is_rs_robust(g, 3, 2).verdict


@pytest.mark.parametrize("seed", range(12))
def test_preferential_growth_stays_robust(seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, 4))
    s = int(rng.integers(1, 4))
    g = random_robust_graph(int(rng.integers(7, 11)), r, s, rng).graph
    assert is_rs_robust(g, r, min(s, g.n)).verdict


@pytest.mark.slow
def test_preferential_growth_stays_robust_many_runs():
    for seed in range(500):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(1, 4))
        s = int(rng.integers(1, 4))
        g = random_robust_graph(int(rng.integers(7, 13)), r, s, rng).graph
        assert is_rs_robust(g, r, min(s, g.n)).verdict, f"seed {seed}"


def test_preferential_growth_is_deterministic(k5):
    a = grow_preferential(k5, 3, 2, 5, 7, attachments=4)
    b = grow_preferential(k5, 3, 2, 5, 7, attachments=4)
    assert a.graph == b.graph
    assert a.steps == b.steps
    assert a.seed_checked
    assert a.graph.n == 10


def test_preferential_growth_needs_enough_attachments(k5):
    with pytest.raises(InputError):
        grow_preferential(k5, 3, 2, 2, 0, attachments=3)


def test_preferential_targets_follow_degree():
    g = star(6)  # centre degree 10, each leaf degree 2
    rng = np.random.default_rng(2024)
    counts = np.zeros(g.n)
    draws = 4000
    for _ in range(draws):
        (pick,) = preferential_targets(g, 1, rng)
        counts[pick] += 1
    expected = draws * np.array([0.5] + [0.1] * 5)
    assert chisquare(counts, expected).pvalue > 1e-3


def test_preferential_targets_are_distinct():
    picked = preferential_targets(complete_graph(6), 4, 1)
    assert len(picked) == 4
    with pytest.raises(InputError):
        preferential_targets(complete_graph(3), 4, 1)


def test_preferential_targets_on_edgeless_graphs():
    assert preferential_targets(Digraph(3), 0, 1) == frozenset()
    assert preferential_targets(Digraph(0), 0, 1) == frozenset()
    assert len(preferential_targets(Digraph(3), 2, 1)) == 2
