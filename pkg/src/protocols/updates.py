from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np

from src.errors import ConfigError, InputError
from src.graphs.digraph import Digraph
from src.protocols.filtering import FilterOutcome, arcp_filter, no_filter
from src.protocols.weights import WeightPolicy, continuous_weights, discrete_weights

PROTOCOL_KINDS = ("arcp", "lcp")


@dataclass(frozen=True)
class ProtocolSpec:
    kind: str = "arcp"
    F: int = 0

    def __post_init__(self) -> None:
        if self.kind not in PROTOCOL_KINDS:
            raise ConfigError(f"unknown protocol {self.kind!r}; expected one of {PROTOCOL_KINDS}")
        if self.F < 0:
            raise ConfigError(f"F must be non-negative, got {self.F}")
        if self.kind == "lcp" and self.F:
            raise ConfigError("lcp takes no filter parameter")

    @property
    def filter_size(self) -> int:
        return self.F if self.kind == "arcp" else 0

    @property
    def label(self) -> str:
        return f"arcp(F={self.F})" if self.kind == "arcp" else "lcp"


def _filter(i: int, x: np.ndarray, g: Digraph, F: int) -> FilterOutcome:
    neighbors = [(j, x[j]) for j in sorted(g.in_neighbors(i))]
    if F == 0:
        return no_filter(i, neighbors)
    return arcp_filter(i, float(x[i]), neighbors, F)


# ---------- Discrete time ----------
def discrete_step_value(self_value: float, kept_values: Mapping[int, float], weights: Mapping[int, float]) -> float:
    """x_i + sum_j w_ij (x_j - x_i) over kept neighbours; same as the weighted sum since rows sum to 0."""
    total = self_value
    for j in sorted(kept_values):
        total += weights[j] * (kept_values[j] - self_value)
    return total


def node_step(i: int, x: np.ndarray, g: Digraph, protocol: ProtocolSpec,
              policy: WeightPolicy) -> Tuple[float, FilterOutcome]:
    outcome = _filter(i, x, g, protocol.filter_size)
    weights = discrete_weights(outcome, policy, g.in_degree(i))
    kept = {j: float(x[j]) for j in outcome.kept_neighbors}
    return discrete_step_value(float(x[i]), kept, weights), outcome


def lcp_step(i: int, x: np.ndarray, g: Digraph, policy: WeightPolicy) -> float:
    return node_step(i, x, g, ProtocolSpec("lcp"), policy)[0]


# ---------- Continuous time ----------
def sort_ascending(z: Sequence[float]) -> np.ndarray:
    return np.sort(np.asarray(z, dtype=float), kind="stable")


def reduce_zero_selective(z: Sequence[float], w: Sequence[float], F: int) -> float:
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    k = z.size
    if w.size != k:
        raise InputError(f"value and weight vectors differ in length ({k} vs {w.size})")
    if k and np.any(np.diff(z) < 0):
        raise InputError("reduce input must be sorted ascending")
    if k <= F:
        return 0.0
    low = np.where(z >= 0, z, 0.0)
    high = np.where(z <= 0, z, 0.0)
    if k > 2 * F:
        return float(np.dot(w[:F], low[:F]) + np.dot(w[F:k - F], z[F:k - F]) + np.dot(w[k - F:], high[k - F:]))
    return float(np.dot(w[:k - F], low[:k - F]) + np.dot(w[F:], high[F:]))


def phi(z: Sequence[float], w: Sequence[float], F: int) -> float:
    """Sort z, then reduce. ``w`` is given in sorted (rank) order."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if z.size != w.size:
        raise InputError(f"value and weight vectors differ in length ({z.size} vs {w.size})")
    return reduce_zero_selective(sort_ascending(z), w, F)


def _neighbor_weights(i: int, neighbors: Sequence[int], policy: WeightPolicy) -> np.ndarray:
    if policy.rule == "uniform":
        return np.ones(len(neighbors))
    return np.array([policy.lookup(i, j) for j in neighbors])


def continuous_rate(i: int, x: np.ndarray, g: Digraph, F: int, policy: WeightPolicy) -> float:
    neighbors = sorted(g.in_neighbors(i))
    if not neighbors:
        return 0.0
    ids = np.asarray(neighbors)
    offsets = np.asarray(x, dtype=float)[neighbors] - float(x[i])
    # id-indexed weights follow their neighbour into rank order; ties put the
    # larger id on the clamped end of either side, as arcp_filter removes it
    tiebreak = np.where(offsets < 0, -ids, ids)
    ranked = _neighbor_weights(i, neighbors, policy)[np.lexsort((tiebreak, offsets))]
    return phi(offsets, ranked, F)


def node_rate(i: int, x: np.ndarray, g: Digraph, protocol: ProtocolSpec,
              policy: WeightPolicy) -> Tuple[float, FilterOutcome]:
    rate = continuous_rate(i, x, g, protocol.filter_size, policy)
    return rate, _filter(i, x, g, protocol.filter_size)


def lcp_rate(i: int, x: np.ndarray, g: Digraph, policy: WeightPolicy) -> float:
    return continuous_rate(i, x, g, 0, policy)


def filtered_rate(outcome: FilterOutcome, x: np.ndarray, policy: WeightPolicy, d_i: int) -> float:
    """Filter-then-sum form of the continuous update; agrees with ``continuous_rate`` up to rounding."""
    weights = continuous_weights(outcome, policy, d_i)
    xi = float(x[outcome.node])
    return sum(weights[j] * (float(x[j]) - xi) for j in sorted(outcome.kept_neighbors))
