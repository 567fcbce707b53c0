from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Tuple

from src.errors import InputError


@dataclass(frozen=True)
class FilterOutcome:
    node: int
    removed: FrozenSet[int]
    kept: FrozenSet[int]  # always contains ``node``

    @property
    def kept_neighbors(self) -> FrozenSet[int]:
        return self.kept - {self.node}


def _check_neighbors(self_id: int, neighbor_values: Iterable[Tuple[int, float]]) -> List[Tuple[int, float]]:
    items = [(int(j), float(v)) for j, v in neighbor_values]
    ids = [j for j, _ in items]
    if len(set(ids)) != len(ids):
        raise InputError(f"duplicate neighbour ids for node {self_id}: {sorted(ids)}")
    if self_id in ids:
        raise InputError(f"node {self_id} lists itself as a neighbour")
    return items


def arcp_filter(self_id: int, self_value: float, neighbor_values: Iterable[Tuple[int, float]],
                F: int) -> FilterOutcome:
    """Drop up to F values strictly above and F strictly below ``self_value``.

    Among equal values the larger id is dropped first. Values equal to
    ``self_value`` are never candidates.
    """
    if F < 0:
        raise InputError(f"F must be non-negative, got {F}")
    items = _check_neighbors(self_id, neighbor_values)
    larger = sorted((it for it in items if it[1] > self_value), key=lambda it: (-it[1], -it[0]))
    smaller = sorted((it for it in items if it[1] < self_value), key=lambda it: (it[1], -it[0]))
    removed = frozenset(j for j, _ in larger[:F]) | frozenset(j for j, _ in smaller[:F])
    kept = frozenset(j for j, _ in items if j not in removed) | {self_id}
    return FilterOutcome(node=self_id, removed=removed, kept=kept)


def no_filter(self_id: int, neighbor_values: Iterable[Tuple[int, float]]) -> FilterOutcome:
    items = _check_neighbors(self_id, neighbor_values)
    return FilterOutcome(node=self_id, removed=frozenset(), kept=frozenset(j for j, _ in items) | {self_id})
