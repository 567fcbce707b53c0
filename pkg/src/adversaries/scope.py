from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Union

from src.errors import ConfigError, InputError
from src.graphs.digraph import Digraph, SwitchingSchedule

logger = logging.getLogger(__name__)

SCOPE_KINDS = ("total", "local")


@dataclass(frozen=True)
class ThreatScope:
    kind: str = "total"
    F: int = 0

    def __post_init__(self) -> None:
        if self.kind not in SCOPE_KINDS:
            raise ConfigError(f"unknown threat scope {self.kind!r}; expected one of {SCOPE_KINDS}")
        if self.F < 0:
            raise ConfigError(f"scope F must be non-negative, got {self.F}")

    @property
    def label(self) -> str:
        return f"{self.F}-{self.kind}"


@dataclass(frozen=True)
class ScopeViolation:
    segment_start: float
    node: int  # -1 for a network-wide (F-total) count
    count: int


@dataclass
class ScopeReport:
    ok: bool
    scope: ThreatScope
    violations: List[ScopeViolation] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return f"{self.scope.label}: ok"
        parts = []
        for v in self.violations[:5]:
            where = "network" if v.node < 0 else f"node {v.node}"
            parts.append(f"t>={v.segment_start:g} {where} sees {v.count}")
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        return f"{self.scope.label} exceeded: " + "; ".join(parts) + more


def validate_scope(topology: Union[Digraph, SwitchingSchedule], adversaries: Iterable[int],
                   scope: ThreatScope) -> ScopeReport:
    schedule = topology if isinstance(topology, SwitchingSchedule) else SwitchingSchedule.static(topology)
    bad = frozenset(int(a) for a in adversaries)
    for a in bad:
        if not (0 <= a < schedule.n):
            raise InputError(f"adversary {a} is not a node of the graph")
    violations: List[ScopeViolation] = []
    if scope.kind == "total":
        if len(bad) > scope.F:
            violations.append(ScopeViolation(0.0, -1, len(bad)))
    else:
        for start, g in schedule.segments:
            for i in g.nodes:
                if i in bad:
                    continue
                seen = len(g.in_neighbors(i) & bad)
                if seen > scope.F:
                    violations.append(ScopeViolation(start, i, seen))
    report = ScopeReport(ok=not violations, scope=scope, violations=violations)
    logger.debug("Scope check %s on %d adversaries: %s", scope.label, len(bad), report.describe())
    return report
