from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Optional, Tuple

import numpy as np

from config import settings
from src.adversaries.strategies import AdversaryStrategy, Constant
from src.errors import InputError
from src.graphs.digraph import Digraph
from src.graphs.robustness import is_rs_robust

logger = logging.getLogger(__name__)


@dataclass
class AttackPlan:
    adversaries: Tuple[int, ...]
    strategies: Dict[int, AdversaryStrategy]
    initial_values: np.ndarray
    witness: Tuple[FrozenSet[int], FrozenSet[int]]


def _reaching(g: Digraph, S: FrozenSet[int], r: int) -> FrozenSet[int]:
    return frozenset(i for i in S if len(g.in_neighbors(i) - S) >= r)


def necessity_attack(g: Digraph, F: int, limit: Optional[int] = None,
                     low: float = settings.ATTACK_LOW, high: float = settings.ATTACK_HIGH,
                     interior: float = settings.ATTACK_INTERIOR) -> Optional[AttackPlan]:
    """Build the stalling attack on a graph that is not (F+1,F+1)-robust; None when the graph is."""
    if not low < high:
        raise InputError(f"attack needs low < high, got {low} and {high}")
    if g.n < 2:
        return None
    cert = is_rs_robust(g, F + 1, min(F + 1, g.n), limit=limit)
    if cert.verdict:
        return None
    s1, s2 = cert.witness
    adversaries = _reaching(g, s1, F + 1) | _reaching(g, s2, F + 1)
    strategies: Dict[int, AdversaryStrategy] = {}
    init = np.full(g.n, interior, dtype=float)
    for i in s1:
        init[i] = low
    for i in s2:
        init[i] = high
    for a in adversaries:
        strategies[a] = Constant(low if a in s1 else high)
    logger.info("Attack on F=%d: S1=%s S2=%s adversaries=%s",
                F, sorted(s1), sorted(s2), sorted(adversaries))
    return AttackPlan(tuple(sorted(adversaries)), strategies, init, (s1, s2))
