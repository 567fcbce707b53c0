from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from src.errors import InputError

logger = logging.getLogger(__name__)

Arc = Tuple[int, int]


@dataclass(frozen=True)
class Digraph:
    """Simple digraph on dense ids 0..n-1. An arc (j, i) means j influences i."""

    n: int
    edges: FrozenSet[Arc] = frozenset()
    _in: Tuple[FrozenSet[int], ...] = field(init=False, repr=False, compare=False)
    _out: Tuple[FrozenSet[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InputError(f"node count must be non-negative, got {self.n}")
        edges = frozenset((int(j), int(i)) for j, i in self.edges)
        ins: List[set] = [set() for _ in range(self.n)]
        outs: List[set] = [set() for _ in range(self.n)]
        for j, i in edges:
            if not (0 <= j < self.n and 0 <= i < self.n):
                raise InputError(f"arc ({j}, {i}) has an endpoint outside 0..{self.n - 1}")
            if j == i:
                raise InputError(f"self-loop on node {i}")
            ins[i].add(j)
            outs[j].add(i)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_in", tuple(frozenset(s) for s in ins))
        object.__setattr__(self, "_out", tuple(frozenset(s) for s in outs))

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Arc]) -> "Digraph":
        seen: set = set()
        for arc in arcs:
            arc = (int(arc[0]), int(arc[1]))
            if arc in seen:
                raise InputError(f"duplicate arc {arc[0]} -> {arc[1]}")
            seen.add(arc)
        return cls(n, frozenset(seen))

    @property
    def nodes(self) -> range:
        return range(self.n)

    def _check(self, i: int) -> None:
        if not (0 <= i < self.n):
            raise InputError(f"node {i} is not in 0..{self.n - 1}")

    def in_neighbors(self, i: int) -> FrozenSet[int]:
        self._check(i)
        return self._in[i]

    def inclusive_neighbors(self, i: int) -> FrozenSet[int]:
        return self.in_neighbors(i) | {i}

    def out_neighbors(self, i: int) -> FrozenSet[int]:
        self._check(i)
        return self._out[i]

    def in_degree(self, i: int) -> int:
        return len(self.in_neighbors(i))

    def degree(self, i: int) -> int:
        return len(self.in_neighbors(i)) + len(self._out[i])

    def max_in_degree(self) -> int:
        return max((len(s) for s in self._in), default=0)

    def is_symmetric(self) -> bool:
        return all((i, j) in self.edges for j, i in self.edges)

    def add_node(self, targets: Iterable[int], symmetric: bool = True) -> "Digraph":
        """Append node n wired to ``targets`` (target -> new, plus new -> target when symmetric)."""
        new = self.n
        arcs = set(self.edges)
        for t in targets:
            self._check(t)
            arcs.add((t, new))
            if symmetric:
                arcs.add((new, t))
        return Digraph(self.n + 1, frozenset(arcs))

    def with_arc(self, j: int, i: int) -> "Digraph":
        return Digraph(self.n, self.edges | {(j, i)})

    def to_networkx(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(sorted(self.edges))
        return G

    @classmethod
    def from_networkx(cls, G: nx.Graph) -> "Digraph":
        if not G.is_directed():
            G = G.to_directed()
        G = nx.convert_node_labels_to_integers(G, ordering="sorted")
        return cls(G.number_of_nodes(), frozenset((int(u), int(v)) for u, v in G.edges() if u != v))


def in_neighbors(g: Digraph, i: int) -> FrozenSet[int]:
    return g.in_neighbors(i)


def inclusive_neighbors(g: Digraph, i: int) -> FrozenSet[int]:
    return g.inclusive_neighbors(i)


def from_undirected(edge_list: Iterable[Tuple[int, int]], n: Optional[int] = None) -> Digraph:
    pairs: List[Tuple[int, int]] = []
    seen: set = set()
    for a, b in edge_list:
        a, b = int(a), int(b)
        if a == b:
            raise InputError(f"self-loop on node {a}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise InputError(f"duplicate edge {{{a}, {b}}}")
        seen.add(key)
        pairs.append((a, b))
    if n is None:
        n = 1 + max((max(p) for p in pairs), default=-1)
    arcs = {(a, b) for a, b in pairs} | {(b, a) for a, b in pairs}
    return Digraph(n, frozenset(arcs))


def complete_graph(n: int) -> Digraph:
    return Digraph(n, frozenset((j, i) for j in range(n) for i in range(n) if i != j))


# ---------- Switching schedules ----------
@dataclass(frozen=True)
class SwitchingSchedule:
    segments: Tuple[Tuple[float, Digraph], ...]
    dwell: float = 0.0

    def __post_init__(self) -> None:
        segs = tuple((float(t), g) for t, g in self.segments)
        if not segs:
            raise InputError("schedule needs at least one segment")
        if segs[0][0] != 0.0:
            raise InputError(f"first segment must start at 0, got {segs[0][0]}")
        n = segs[0][1].n
        for (t0, _), (t1, g1) in zip(segs, segs[1:]):
            if t1 <= t0:
                raise InputError(f"segment start times must increase ({t0} then {t1})")
            if g1.n != n:
                raise InputError(f"segment at t={t1} has {g1.n} nodes, expected {n}")
        if self.dwell < 0:
            raise InputError(f"dwell must be non-negative, got {self.dwell}")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def static(cls, g: Digraph) -> "SwitchingSchedule":
        return cls(((0.0, g),))

    @property
    def n(self) -> int:
        return self.segments[0][1].n

    @property
    def starts(self) -> List[float]:
        return [t for t, _ in self.segments]

    def graph_at(self, t: float) -> Digraph:
        if t < 0:
            raise InputError(f"time must be non-negative, got {t}")
        idx = bisect.bisect_right(self.starts, t) - 1
        return self.segments[idx][1]

    def segment_bounds(self, horizon: Optional[float] = None) -> Iterator[Tuple[float, float, Digraph]]:
        """Yield (start, end, graph); the last segment ends at ``horizon`` (or inf)."""
        end_last = float("inf") if horizon is None else float(horizon)
        for k, (start, g) in enumerate(self.segments):
            end = self.segments[k + 1][0] if k + 1 < len(self.segments) else end_last
            yield start, end, g

    def dwell_ok(self, dwell: Optional[float] = None) -> bool:
        tau = self.dwell if dwell is None else dwell
        starts = self.starts
        return all(b - a >= tau for a, b in zip(starts, starts[1:]))

    def min_segment_length(self) -> float:
        starts = self.starts
        return min((b - a for a, b in zip(starts, starts[1:])), default=float("inf"))

    def max_in_degree(self) -> int:
        return max(g.max_in_degree() for _, g in self.segments)

    def graphs(self) -> List[Digraph]:
        return [g for _, g in self.segments]


def graph_at(s: SwitchingSchedule, t: float) -> Digraph:
    return s.graph_at(t)


# ---------- Edge-list text ----------
def parse_edge_list(text: str) -> Digraph:
    """Parse ``u v`` (undirected), ``u -> v`` (directed) and ``nodes N`` lines; ``#`` starts a comment."""
    arcs: set = set()
    declared_n = 0
    max_id = -1

    def _add(arc: Arc, lineno: int) -> None:
        if arc in arcs:
            raise InputError(f"line {lineno}: duplicate arc {arc[0]} -> {arc[1]}")
        arcs.add(arc)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("nodes"):
                declared_n = int(line.split()[1])
                continue
            if "->" in line:
                left, right = line.split("->", 1)
                u, v = int(left), int(right)
                directed = True
            else:
                parts = line.split()
                if len(parts) != 2:
                    raise ValueError(line)
                u, v = int(parts[0]), int(parts[1])
                directed = False
        except (ValueError, IndexError):
            raise InputError(f"line {lineno}: cannot parse {raw.strip()!r}") from None
        if u < 0 or v < 0:
            raise InputError(f"line {lineno}: node ids must be non-negative")
        if u == v:
            raise InputError(f"line {lineno}: self-loop on node {u}")
        _add((u, v), lineno)
        if not directed:
            _add((v, u), lineno)
        max_id = max(max_id, u, v)
    n = max(declared_n, max_id + 1)
    return Digraph(n, frozenset(arcs))


def load_edge_list(path: Path | str) -> Digraph:
    return parse_edge_list(Path(path).read_text())


def format_edge_list(g: Digraph) -> str:
    lines = [f"nodes {g.n}"]
    for j, i in sorted(g.edges):
        if (i, j) in g.edges:
            if j < i:
                lines.append(f"{j} {i}")
        else:
            lines.append(f"{j} -> {i}")
    return "\n".join(lines) + "\n"


def to_dot(g: Digraph, adversaries: Sequence[int] = ()) -> str:
    bad = set(adversaries)
    out = ["digraph G {"]
    for i in g.nodes:
        style = ' [style=filled, fillcolor="#ef5350"]' if i in bad else ""
        out.append(f"  {i}{style};")
    for j, i in sorted(g.edges):
        if (i, j) in g.edges:
            if j < i:
                out.append(f"  {j} -> {i} [dir=both];")
        else:
            out.append(f"  {j} -> {i};")
    out.append("}")
    return "\n".join(out) + "\n"
