from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.adversaries.attacks import necessity_attack
from src.adversaries.scope import ThreatScope, validate_scope
from src.adversaries.strategies import (
    Constant,
    Pull,
    Ramp,
    Sine,
    adversary_value,
    format_strategy,
    parse_strategy,
)
from src.engine.simulator import RunConfig, Verdict, run_discrete
from src.errors import ConfigError, InputError
from src.graphs.digraph import Digraph, SwitchingSchedule, complete_graph
from src.graphs.generators import random_digraph, random_robust_graph
from src.protocols.updates import ProtocolSpec


# ---------- Strategies ----------
def test_constant_and_ramp_values():
    assert adversary_value(Constant(2.0), 7.0, [0.0]) == 2.0
    ramp = Ramp(0.0, 0.1, clamp=2.0)
    assert adversary_value(ramp, 5.0, []) == pytest.approx(0.5)
    assert adversary_value(ramp, 100.0, []) == 2.0
    assert adversary_value(Ramp(1.0, -1.0, clamp=-3.0), 50.0, []) == -3.0


@given(st.floats(min_value=0, max_value=1e3), st.floats(min_value=1e-4, max_value=1.0))
def test_sine_changes_no_faster_than_its_slope(t, dt):
    sine = Sine(0.5, 2.0, 3.0)
    jump = abs(sine.value(t + dt, [], dt) - sine.value(t, [], dt))
    assert jump <= sine.max_slope() * dt + 1e-9


def test_pull_moves_toward_target():
    pull = Pull(2.0, rate=0.5)
    assert pull.value(1.0, [0.0], 1.0) == 0.5
    assert pull.value(1.0, [1.9], 1.0) == 2.0
    assert pull.value(1.0, [3.0], 0.1) == pytest.approx(2.95)
    assert pull.value(0.0, [], 1.0) == 2.0


def test_bad_strategy_parameters():
    with pytest.raises(ConfigError):
        Sine(0.0, 1.0, 0.0)
    with pytest.raises(ConfigError):
        Pull(1.0, rate=-1.0)
    with pytest.raises(ConfigError):
        Ramp(0.0, math.inf)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("constant 2", Constant(2.0)),
        ("ramp 0 0.1 clamp 2", Ramp(0.0, 0.1, 2.0)),
        ("ramp 1 -0.5", Ramp(1.0, -0.5)),
        ("sine 0.5 1 period 10", Sine(0.5, 1.0, 10.0)),
        ("sine 0.5 1 10", Sine(0.5, 1.0, 10.0)),
        ("pull 3 rate 0.25", Pull(3.0, 0.25)),
        ("pull 3", Pull(3.0)),
    ],
)
def test_parse_strategy(text, expected):
    parsed = parse_strategy(text.split())
    assert parsed == expected
    assert parse_strategy(format_strategy(parsed).split()) == parsed


@pytest.mark.parametrize("text", ["", "teleport 1", "constant", "ramp 1", "ramp 0 1 clamp"])
def test_parse_strategy_errors(text):
    with pytest.raises(ConfigError):
        parse_strategy(text.split())


# ---------- Threat scopes ----------
def test_local_scope_on_outer_nodes(fig2_local):
    assert validate_scope(fig2_local, {5, 6}, ThreatScope("local", 1)).ok
    assert not validate_scope(fig2_local, {5, 6}, ThreatScope("total", 1)).ok


def test_shared_neighbours_break_local_scope(fig2):
    report = validate_scope(fig2, {0, 3}, ThreatScope("local", 1))
    assert not report
    assert {v.node for v in report.violations} == {1, 2, 6}
    assert "exceeded" in report.describe()


def test_total_scope_counts_adversaries():
    g = complete_graph(4)
    assert validate_scope(g, {0}, ThreatScope("local", 1)).ok
    assert validate_scope(g, {0}, ThreatScope("total", 1)).ok
    report = validate_scope(g, {0, 1}, ThreatScope("total", 1))
    assert not report.ok
    assert report.violations[0].node == -1
    assert report.violations[0].count == 2


def test_local_scope_checked_on_every_segment():
    g0 = Digraph(3, frozenset({(0, 2)}))
    g1 = complete_graph(3)
    schedule = SwitchingSchedule(((0.0, g0), (4.0, g1)))
    report = validate_scope(schedule, {0, 1}, ThreatScope("local", 1))
    assert not report.ok
    assert [(v.segment_start, v.node, v.count) for v in report.violations] == [(4.0, 2, 2)]


def test_scope_rejects_unknown_nodes_and_kinds():
    with pytest.raises(InputError):
        validate_scope(complete_graph(3), {5}, ThreatScope("total", 1))
    with pytest.raises(ConfigError):
        ThreatScope("global", 1)


# ---------- Stalling attack ----------
def test_attack_on_two_clique_needs_no_adversaries(fig1):
    plan = necessity_attack(fig1, 2)
    assert plan is not None
    assert plan.adversaries == ()
    assert plan.witness == (frozenset(range(4)), frozenset(range(4, 9)))
    assert list(plan.initial_values) == [0.0] * 4 + [1.0] * 5


def test_attack_is_none_on_robust_graphs():
    assert necessity_attack(complete_graph(3), 1) is None
    g = random_robust_graph(9, 2, 2, 4).graph
    assert necessity_attack(g, 1) is None
    assert necessity_attack(Digraph(1), 0) is None


def _assert_attack_stalls(g: Digraph, F: int, rounds: int) -> None:
    plan = necessity_attack(g, F)
    assert plan is not None
    assert validate_scope(g, plan.adversaries, ThreatScope("total", F)).ok
    cfg = RunConfig(horizon=rounds, stop_on_stall=False)
    trace = run_discrete(g, ProtocolSpec("arcp", F), plan.strategies, plan.initial_values, cfg)
    assert np.all(trace.psi == trace.psi[0])
    assert trace.psi[0] == 1.0
    assert trace.verdict is Verdict.STALLED


def test_attack_stalls_the_seven_node_graph(fig2):
    _assert_attack_stalls(fig2, 2, 300)


@pytest.mark.parametrize("seed", range(8))
def test_attack_stalls_random_graphs(seed):
    g = random_digraph(7 + seed % 3, 0.35, seed=seed, directed=False)
    if necessity_attack(g, 1) is None:
        pytest.skip("graph happens to be (2,2)-robust")
    _assert_attack_stalls(g, 1, 300)


@pytest.mark.slow
def test_attack_stalls_random_graphs_for_a_thousand_rounds():
    tried = 0
    for seed in range(60):
        g = random_digraph(8, 0.3, seed=seed, directed=seed % 2 == 0)
        if necessity_attack(g, 1) is None:
            continue
        _assert_attack_stalls(g, 1, 1000)
        tried += 1
    assert tried > 0
