from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from config import settings
from src.engine.simulator import RunTrace

logger = logging.getLogger(__name__)


def contraction_bound(N: int, alpha: float) -> float:
    return 1.0 - alpha ** (N - 1) / 2.0


@dataclass
class ContractionReport:
    bound: float
    windows: List[Tuple[int, float]] = field(default_factory=list)  # (t0, Psi[t0+N-1] / Psi[t0])

    @property
    def worst(self) -> Optional[float]:
        return max((r for _, r in self.windows), default=None)

    @property
    def ok(self) -> bool:
        return all(r <= self.bound for _, r in self.windows)


def measure_contraction(trace: RunTrace, N: int, alpha: float) -> ContractionReport:
    """Sliding-window ratios Psi[t0+N-1] / Psi[t0]; windows starting below the consensus tolerance are skipped."""
    span = max(N - 1, 1)
    report = ContractionReport(bound=contraction_bound(N, alpha))
    psi = trace.psi
    for t0 in range(len(psi) - span):
        if psi[t0] == 0 or psi[t0] < trace.tol:
            continue
        report.windows.append((t0, float(psi[t0 + span] / psi[t0])))
    logger.debug("Contraction over %d windows: worst %s vs bound %.6g", len(report.windows),
                 report.worst, report.bound)
    return report


@dataclass(frozen=True)
class RateViolation:
    t: float
    node: int
    rate: float
    low: float
    high: float


def check_rate_bounds(trace: RunTrace, beta: float, F: int, n: Optional[int] = None,
                      B: Optional[float] = None,
                      slack: float = settings.ENGINE.rate_bound_slack) -> List[RateViolation]:
    """Every recorded rate must sit in [B(m - x_i), B(M - x_i)] with B = beta (n - F - 1)."""
    if trace.rates is None:
        return []
    size = trace.n if n is None else n
    B = beta * (size - F - 1) if B is None else B
    out: List[RateViolation] = []
    normal = list(trace.normal)
    for k in range(trace.rates.shape[0]):
        x = trace.values[k]
        m, M = trace.m[k], trace.M[k]
        for i in normal:
            rate = trace.rates[k, i]
            lo, hi = B * (m - x[i]), B * (M - x[i])
            if rate < lo - slack or rate > hi + slack:
                out.append(RateViolation(float(trace.times[k]), i, float(rate), float(lo), float(hi)))
    if out:
        logger.warning("%d rate samples fall outside the update envelope", len(out))
    return out


@dataclass
class InvariantReport:
    safety: List[Tuple[float, int, float]] = field(default_factory=list)
    psi_increases: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.safety and not self.psi_increases


def trace_invariants(trace: RunTrace, slack: Optional[float] = None) -> InvariantReport:
    """Recheck safety and Psi monotonicity from the stored samples."""
    m0, M0 = trace.safety_interval
    if slack is None:
        if trace.mode == "continuous":
            slack = settings.ENGINE.continuous_safety_slack * (M0 - m0)
        else:
            scale = max(abs(m0), abs(M0), np.finfo(float).tiny)
            slack = settings.ENGINE.discrete_rounding_ulps * float(np.spacing(scale))
    report = InvariantReport()
    normal = list(trace.normal)
    for k, t in enumerate(trace.times):
        row = trace.values[k, normal]
        for idx in np.flatnonzero((row < m0 - slack) | (row > M0 + slack)):
            report.safety.append((float(t), normal[idx], float(row[idx])))
    rises = np.flatnonzero(np.diff(trace.psi) > slack)
    report.psi_increases = [(float(trace.times[k + 1]), float(trace.psi[k + 1] - trace.psi[k])) for k in rises]
    return report
