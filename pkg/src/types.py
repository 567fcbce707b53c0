from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional


@dataclass
class RunSummary:
    name: str
    protocol: str
    mode: str
    verdict: str
    n: int
    adversaries: int
    steps: int
    final_time: float
    psi0: float
    psi_final: float
    consensus_value: Optional[float]
    time_to_consensus: Optional[float]
    safety_violations: int
    error: Optional[str] = None
    trace_path: Optional[str] = None
    chart_path: Optional[str] = None

    def as_row(self) -> dict:
        return asdict(self)
