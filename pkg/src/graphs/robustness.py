from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from config import settings
from src.errors import CapacityError, InputError
from src.graphs.digraph import Digraph

logger = logging.getLogger(__name__)

_NO_PAIR = np.iinfo(np.int32).max


@dataclass
class RobustnessCertificate:
    verdict: bool
    r: int
    s: int
    witness: Optional[Tuple[FrozenSet[int], FrozenSet[int]]] = None
    reach: Optional[Tuple[int, int]] = None
    note: str = ""

    def revalidate(self, g: Digraph) -> bool:
        """True when the recorded witness really breaks all three pair conditions."""
        if self.witness is None:
            return self.verdict
        s1, s2 = self.witness
        return (not pair_satisfies(g, s1, s2, self.r, self.s)
                and (reach_count(g, s1, self.r), reach_count(g, s2, self.r)) == self.reach)

    def describe(self) -> str:
        head = f"({self.r},{self.s})-robust: {'true' if self.verdict else 'false'}"
        if self.witness is None:
            return head + (f" ({self.note})" if self.note else "")
        s1, s2 = self.witness
        return (f"{head}; witness S1={sorted(s1)} S2={sorted(s2)} "
                f"reach={self.reach[0]},{self.reach[1]}")


# ---------- Per-set counts ----------
def _as_set(g: Digraph, nodes: Iterable[int], label: str = "S") -> FrozenSet[int]:
    out = frozenset(int(i) for i in nodes)
    if not out:
        raise InputError(f"{label} must be nonempty")
    for i in out:
        if not (0 <= i < g.n):
            raise InputError(f"{label} contains node {i} outside 0..{g.n - 1}")
    return out


def reach_count(g: Digraph, S: Iterable[int], r: int) -> int:
    """Number of nodes in S with at least r in-neighbours outside S."""
    S = _as_set(g, S)
    return sum(1 for i in S if len(g.in_neighbors(i) - S) >= r)


def is_r_reachable(g: Digraph, S: Iterable[int], r: int) -> bool:
    return reach_count(g, S, r) >= 1


def is_rs_reachable(g: Digraph, S: Iterable[int], r: int, s: int) -> bool:
    return reach_count(g, S, r) >= s


def pair_satisfies(g: Digraph, S1: Iterable[int], S2: Iterable[int], r: int, s: int) -> bool:
    S1 = _as_set(g, S1, "S1")
    S2 = _as_set(g, S2, "S2")
    if S1 & S2:
        raise InputError(f"S1 and S2 overlap on {sorted(S1 & S2)}")
    c1, c2 = reach_count(g, S1, r), reach_count(g, S2, r)
    return c1 == len(S1) or c2 == len(S2) or c1 + c2 >= s


def min_in_degree(g: Digraph) -> int:
    return min((g.in_degree(i) for i in g.nodes), default=0)


# ---------- Exhaustive checker ----------
def _check_capacity(n: int, limit: Optional[int]) -> None:
    cap = settings.ENUMERATION_LIMIT if limit is None else limit
    if n > cap:
        raise CapacityError(
            f"robustness check on n={n} nodes exceeds the enumeration limit {cap} "
            f"(pair space 3^{n} = {3 ** n:,}); raise the limit to force it"
        )


def _bits(mask: int) -> FrozenSet[int]:
    return frozenset(b for b in range(mask.bit_length()) if mask >> b & 1)


@dataclass
class _PairTable:
    cnt: np.ndarray
    bad: np.ndarray
    best: np.ndarray  # min reach count of a non-full S2 inside each mask
    masks: np.ndarray
    full: int


def _pair_table(g: Digraph, r: int) -> _PairTable:
    n = g.n
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    full = size - 1
    comp = full ^ masks
    popcount = np.zeros(size, dtype=np.int32)
    for b in range(n):
        popcount += ((masks >> b) & 1).astype(np.int32)
    cnt = np.zeros(size, dtype=np.int32)
    for i in range(n):
        in_mask = sum(1 << j for j in g.in_neighbors(i))
        outside = popcount[comp & in_mask]
        cnt += (((masks >> i) & 1) == 1) & (outside >= r)
    bad = (masks != 0) & (cnt < popcount)
    best = np.where(bad, cnt, _NO_PAIR).astype(np.int32)
    for b in range(n):
        upper = masks[(masks >> b) & 1 == 1]
        best[upper] = np.minimum(best[upper], best[upper ^ (1 << b)])
    logger.debug("Pair table for n=%d r=%d: %d non-full subsets", n, r, int(bad.sum()))
    return _PairTable(cnt=cnt, bad=bad, best=best, masks=masks, full=full)


def _min_pair(table: _PairTable) -> Optional[int]:
    """Smallest reach sum over pairs of disjoint non-full sets, or None when no such pair exists."""
    s1 = table.masks[table.bad]
    if s1.size == 0:
        return None
    partner = table.best[table.full ^ s1]
    ok = partner < _NO_PAIR
    if not ok.any():
        return None
    return int((table.cnt[s1][ok].astype(np.int64) + partner[ok]).min())


def _lex_first(masks: np.ndarray) -> int:
    return int(min(masks.tolist(), key=lambda m: sorted(_bits(m))))


def _witness(table: _PairTable, s: int) -> Tuple[int, int]:
    """Lexicographically smallest (sorted S1, sorted S2) among pairs with reach sum below s."""
    room = s - table.cnt.astype(np.int64)
    partner = table.best[table.full ^ table.masks].astype(np.int64)
    S1 = _lex_first(table.masks[table.bad & (partner < room)])
    inside = (table.masks & S1) == 0
    S2 = _lex_first(table.masks[table.bad & inside & (table.cnt < room[S1])])
    return S1, S2


def min_pair_reach(g: Digraph, r: int, limit: Optional[int] = None) -> Optional[int]:
    """Smallest reach-count sum over pairs where neither set is fully reaching; None if no such pair."""
    _check_capacity(g.n, limit)
    return _min_pair(_pair_table(g, r))


def is_rs_robust(g: Digraph, r: int, s: int, limit: Optional[int] = None) -> RobustnessCertificate:
    if r < 0:
        raise InputError(f"r must be non-negative, got {r}")
    if not (1 <= s <= max(g.n, 1)):
        raise InputError(f"s must lie in [1, {max(g.n, 1)}], got {s}")
    if g.n == 0:
        return RobustnessCertificate(r == 0, r, s, note="empty graph")
    if g.n == 1:
        return RobustnessCertificate(r <= 1, r, s, note="trivial graph")
    _check_capacity(g.n, limit)
    table = _pair_table(g, r)
    least = _min_pair(table)
    if least is None or least >= s:
        return RobustnessCertificate(True, r, s)
    m1, m2 = _witness(table, s)
    return RobustnessCertificate(
        False, r, s,
        witness=(_bits(m1), _bits(m2)),
        reach=(int(table.cnt[m1]), int(table.cnt[m2])),
    )


def is_r_robust(g: Digraph, r: int, limit: Optional[int] = None) -> RobustnessCertificate:
    return is_rs_robust(g, r, 1, limit=limit)


def maximal_robustness(g: Digraph, limit: Optional[int] = None) -> Tuple[int, int]:
    if g.n == 0:
        return 0, 1
    if g.n == 1:
        return 1, 1
    _check_capacity(g.n, limit)
    lo, hi = 0, g.n  # r = 0 always holds
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if is_r_robust(g, mid, limit=limit).verdict:
            lo = mid
        else:
            hi = mid - 1
    reach = min_pair_reach(g, lo, limit=limit)
    s_star = g.n if reach is None else min(g.n, reach)
    return lo, s_star


# ---------- Growth ----------
@dataclass
class GrowthResult:
    graph: Digraph
    seed_checked: bool
    steps: List[FrozenSet[int]] = field(default_factory=list)


def _seed_precondition(g: Digraph, r: int, s: int, limit: Optional[int]) -> bool:
    cap = settings.ENUMERATION_LIMIT if limit is None else limit
    if g.n > cap:
        logger.warning("Seed graph has %d nodes (> %d); (%d,%d)-robustness left unchecked", g.n, cap, r, s)
        return False
    cert = is_rs_robust(g, r, min(s, max(g.n, 1)), limit=limit)
    if not cert.verdict:
        raise InputError(f"seed graph is not ({r},{s})-robust: {cert.describe()}")
    return True


def grow(g: Digraph, r: int, s: int, targets: Iterable[int], symmetric: bool = True,
         check_seed: bool = True, limit: Optional[int] = None) -> Digraph:
    """Attach one new node to at least r+s-1 existing nodes; the result stays (r,s)-robust."""
    chosen = list(targets)
    if len(set(chosen)) != len(chosen):
        raise InputError(f"duplicate attachment targets {chosen}")
    if len(chosen) < r + s - 1:
        raise InputError(f"need at least r+s-1 = {r + s - 1} attachment targets, got {len(chosen)}")
    for t in chosen:
        if not (0 <= t < g.n):
            raise InputError(f"attachment target {t} outside 0..{g.n - 1}")
    if check_seed:
        _seed_precondition(g, r, s, limit)
    return g.add_node(chosen, symmetric=symmetric)


def preferential_targets(g: Digraph, k: int, rng_seed: int | np.random.Generator | None) -> FrozenSet[int]:
    """Sample k distinct nodes with probability proportional to current total degree."""
    if k > g.n:
        raise InputError(f"cannot pick {k} targets from {g.n} nodes")
    if k < 0:
        raise InputError(f"k must be non-negative, got {k}")
    if k == 0:
        return frozenset()
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    deg = np.array([g.degree(i) for i in g.nodes], dtype=float)
    # too few nodes with degree to fill k distinct picks: smooth towards uniform
    if np.count_nonzero(deg) < k:
        deg = deg + 1.0
    picks = rng.choice(g.n, size=k, replace=False, p=deg / deg.sum())
    return frozenset(int(i) for i in picks)


def grow_preferential(seed: Digraph, r: int, s: int, count: int,
                      rng_seed: int | np.random.Generator | None,
                      attachments: Optional[int] = None, symmetric: bool = True,
                      limit: Optional[int] = None) -> GrowthResult:
    k = r + s - 1 if attachments is None else attachments
    if k < r + s - 1:
        raise InputError(f"attachments={k} is below r+s-1 = {r + s - 1}")
    checked = _seed_precondition(seed, r, s, limit)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    g = seed
    steps: List[FrozenSet[int]] = []
    for _ in range(count):
        targets = preferential_targets(g, k, rng)
        g = grow(g, r, s, sorted(targets), symmetric=symmetric, check_seed=False)
        steps.append(targets)
    logger.info("Grew %d -> %d nodes with %d attachments per node (seed checked: %s)",
                seed.n, g.n, k, checked)
    return GrowthResult(graph=g, seed_checked=checked, steps=steps)
