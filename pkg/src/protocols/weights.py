from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

from config import settings
from src.errors import ConfigError
from src.graphs.digraph import Digraph
from src.protocols.filtering import FilterOutcome

logger = logging.getLogger(__name__)

RULES = ("uniform", "custom")


@dataclass(frozen=True)
class WeightPolicy:
    """Weight bounds plus the rule producing w_ij. Custom tables are keyed by (i, j) node ids."""

    alpha: Optional[float] = None
    beta: float = settings.DEFAULT_BETA
    rule: str = "uniform"
    table: Mapping[Tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.rule not in RULES:
            raise ConfigError(f"unknown weight rule {self.rule!r}; expected one of {RULES}")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if self.alpha is not None and self.beta < self.alpha:
            raise ConfigError(f"beta={self.beta} is below alpha={self.alpha}")
        if self.rule == "custom" and not self.table:
            raise ConfigError("custom weight rule needs a weight table")

    def lookup(self, i: int, j: int) -> float:
        try:
            return float(self.table[(i, j)])
        except KeyError:
            raise ConfigError(f"custom weight table has no entry for arc {j} -> {i}") from None

    def check_discrete(self, graphs) -> None:
        """Validate the policy against every graph it will run on (discrete mode)."""
        if self.alpha is not None and self.alpha >= 1:
            raise ConfigError(f"discrete mode needs alpha < 1, got {self.alpha}")
        for g in graphs:
            if self.rule == "uniform":
                implied = uniform_alpha(g)
                if self.alpha is not None and self.alpha > implied:
                    raise ConfigError(
                        f"alpha={self.alpha} exceeds the uniform-rule bound {implied:.6g} (max in-degree {g.max_in_degree()})"
                    )
                continue
            for i in g.nodes:
                weights = [self.lookup(i, j) for j in sorted(g.in_neighbors(i))]
                _check_discrete_row(i, weights, self.alpha)

    def check_continuous(self, graphs) -> None:
        lo = self.alpha if self.alpha is not None else 0.0
        if self.rule == "uniform":
            if not (lo <= 1.0 <= self.beta):
                raise ConfigError(f"uniform continuous weights are 1; need alpha <= 1 <= beta (got {lo}, {self.beta})")
            return
        for g in graphs:
            for i in g.nodes:
                for j in g.in_neighbors(i):
                    w = self.lookup(i, j)
                    if w <= 0 or w < lo or w > self.beta:
                        raise ConfigError(f"weight w[{i},{j}]={w} outside [{self.alpha}, {self.beta}]")


def _check_discrete_row(i: int, weights, alpha: Optional[float]) -> None:
    floor = alpha if alpha is not None else 0.0
    for w in weights:
        if w <= 0 or w < floor:
            raise ConfigError(f"node {i}: neighbour weight {w} below alpha={alpha}")
    self_weight = -sum(weights)
    if alpha is not None and self_weight < alpha - 1:
        raise ConfigError(f"node {i}: self weight {self_weight:.6g} below alpha-1={alpha - 1:.6g}")
    if self_weight <= -1:
        raise ConfigError(f"node {i}: neighbour weights sum to {-self_weight:.6g} >= 1")


def uniform_alpha(g: Digraph) -> float:
    """Smallest weight the uniform discrete rule can hand out on ``g``."""
    return 1.0 / (1 + g.max_in_degree())


def discrete_weights(outcome: FilterOutcome, policy: WeightPolicy, d_i: int) -> Dict[int, float]:
    """Weights over the kept set (self included); each row sums to zero."""
    i = outcome.node
    kept = sorted(outcome.kept_neighbors)
    if policy.rule == "uniform":
        w = 1.0 / (1 + d_i - len(outcome.removed))
        out = {j: w for j in kept}
    else:
        out = {j: policy.lookup(i, j) for j in kept}
        _check_discrete_row(i, list(out.values()), policy.alpha)
    out[i] = -sum(out[j] for j in kept)
    return out


def continuous_weights(outcome: FilterOutcome, policy: WeightPolicy, d_i: int) -> Dict[int, float]:
    i = outcome.node
    kept = sorted(outcome.kept_neighbors)
    if policy.rule == "uniform":
        out = {j: 1.0 for j in kept}
        out[i] = float(len(outcome.removed) - d_i)
        return out
    out = {j: policy.lookup(i, j) for j in kept}
    out[i] = -sum(out[j] for j in kept)
    return out
