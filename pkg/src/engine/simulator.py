from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from src.adversaries.scope import ThreatScope, validate_scope
from src.adversaries.strategies import AdversaryStrategy
from src.errors import ConfigError, InputError, ScopeViolationError
from src.graphs.digraph import Digraph, SwitchingSchedule
from src.protocols.updates import ProtocolSpec, node_rate, node_step
from src.protocols.weights import WeightPolicy
from src.types import RunSummary

logger = logging.getLogger(__name__)

MODES = ("discrete", "continuous")
RemovedEntry = Tuple[float, int, Tuple[int, ...]]


class Verdict(str, Enum):
    CONSENSUS = "consensus"
    STALLED = "stalled"
    SAFETY_VIOLATED = "safety-violated"

    @property
    def exit_code(self) -> int:
        return {"consensus": 0, "stalled": 2, "safety-violated": 3}[self.value]


@dataclass
class RunConfig:
    mode: str = "discrete"
    horizon: float = 1000  # rounds (discrete) or time units (continuous)
    step: Optional[float] = None
    consensus_tol: Optional[float] = None  # absolute; None means consensus_rtol * Psi[0]
    consensus_rtol: float = settings.ENGINE.consensus_rtol
    stall_window: int = settings.ENGINE.stall_window
    stall_eps: float = settings.ENGINE.stall_eps
    stop_on_consensus: bool = True
    stop_on_stall: bool = True
    force: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not self.horizon > 0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if self.step is not None and not self.step > 0:
            raise ConfigError(f"step size must be positive, got {self.step}")
        if self.consensus_tol is not None and not self.consensus_tol > 0:
            raise ConfigError(f"consensus tolerance must be positive, got {self.consensus_tol}")
        if not self.consensus_rtol > 0:
            raise ConfigError(f"relative consensus tolerance must be positive, got {self.consensus_rtol}")
        if self.stall_window < 1:
            raise ConfigError(f"stall window must be at least 1, got {self.stall_window}")


@dataclass
class RunTrace:
    mode: str
    protocol: str
    times: np.ndarray
    values: np.ndarray  # rows are time samples, columns are node ids
    psi: np.ndarray
    m: np.ndarray
    M: np.ndarray
    normal: Tuple[int, ...]
    adversaries: Tuple[int, ...]
    safety_interval: Tuple[float, float]
    verdict: Verdict
    tol: float
    step: float
    removed_log: List[RemovedEntry] = field(default_factory=list)
    rates: Optional[np.ndarray] = None  # continuous only; NaN in adversary columns
    safety_violations: List[Tuple[float, int, float]] = field(default_factory=list)
    consensus_value: Optional[float] = None
    consensus_time: Optional[float] = None

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def summary(self, name: str = "") -> RunSummary:
        return RunSummary(
            name=name,
            protocol=self.protocol,
            mode=self.mode,
            verdict=self.verdict.value,
            n=self.n,
            adversaries=len(self.adversaries),
            steps=len(self.times) - 1,
            final_time=float(self.times[-1]),
            psi0=float(self.psi[0]),
            psi_final=float(self.psi[-1]),
            consensus_value=self.consensus_value,
            time_to_consensus=self.consensus_time,
            safety_violations=len(self.safety_violations),
        )


# ---------- Shared bookkeeping ----------
class _Recorder:
    def __init__(self, x0: np.ndarray, normal: Sequence[int], cfg: RunConfig, slack: float) -> None:
        self.normal = np.asarray(normal, dtype=int)
        self.cfg = cfg
        vals = x0[self.normal]
        self.m0, self.M0 = float(vals.min()), float(vals.max())
        self.psi0 = self.M0 - self.m0
        self.tol = cfg.consensus_tol if cfg.consensus_tol is not None else cfg.consensus_rtol * self.psi0
        self.slack = slack
        self.times: List[float] = []
        self.values: List[np.ndarray] = []
        self.psi: List[float] = []
        self.m: List[float] = []
        self.M: List[float] = []
        self.violations: List[Tuple[float, int, float]] = []
        self.removed: List[RemovedEntry] = []
        self.below_since: Optional[float] = None
        self.below_count = 0
        self.push(0.0, x0)

    def reached(self) -> bool:
        return self.psi0 == 0 or self.psi[-1] < self.tol

    def settled(self) -> bool:
        """Psi has stayed below tolerance for a full stall window of samples."""
        return self.psi0 == 0 or self.below_count >= self.cfg.stall_window

    def stalled(self) -> bool:
        w = self.cfg.stall_window
        if len(self.psi) <= w or self.reached():
            return False
        return self.psi[-w - 1] - self.psi[-1] < self.cfg.stall_eps

    def push(self, t: float, x: np.ndarray) -> None:
        vals = x[self.normal]
        lo, hi = float(vals.min()), float(vals.max())
        self.times.append(t)
        self.values.append(x.copy())
        self.m.append(lo)
        self.M.append(hi)
        self.psi.append(hi - lo)
        outside = (vals < self.m0 - self.slack) | (vals > self.M0 + self.slack)
        for idx in np.flatnonzero(outside):
            self.violations.append((t, int(self.normal[idx]), float(vals[idx])))
        if self.reached():
            if self.below_since is None:
                self.below_since = t
            self.below_count += 1
        else:
            self.below_since, self.below_count = None, 0

    def log_removed(self, t: float, node: int, removed) -> None:
        if removed:
            self.removed.append((t, node, tuple(sorted(removed))))

    def finish(self, mode: str, protocol: ProtocolSpec, adversaries: Sequence[int], step: float,
               rates: Optional[np.ndarray] = None) -> RunTrace:
        if self.violations:
            verdict = Verdict.SAFETY_VIOLATED
        elif self.reached():
            verdict = Verdict.CONSENSUS
        else:
            verdict = Verdict.STALLED
        L = (self.m[-1] + self.M[-1]) / 2 if self.reached() else None
        return RunTrace(
            mode=mode,
            protocol=protocol.label,
            times=np.asarray(self.times, dtype=float),
            values=np.vstack(self.values),
            psi=np.asarray(self.psi),
            m=np.asarray(self.m),
            M=np.asarray(self.M),
            normal=tuple(int(i) for i in self.normal),
            adversaries=tuple(sorted(adversaries)),
            safety_interval=(self.m0, self.M0),
            verdict=verdict,
            tol=self.tol,
            step=step,
            removed_log=self.removed,
            rates=rates,
            safety_violations=self.violations,
            consensus_value=L,
            consensus_time=self.below_since,
        )


def _as_schedule(topology: Union[Digraph, SwitchingSchedule]) -> SwitchingSchedule:
    return topology if isinstance(topology, SwitchingSchedule) else SwitchingSchedule.static(topology)


def _prepare(topology, adversaries: Mapping[int, AdversaryStrategy], init, scope: Optional[ThreatScope],
             cfg: RunConfig):
    schedule = _as_schedule(topology)
    x = np.array(init, dtype=float)
    if x.shape != (schedule.n,):
        raise InputError(f"initial state has {x.size} values for {schedule.n} nodes")
    bad = {int(a) for a in adversaries}
    for a in bad:
        if not (0 <= a < schedule.n):
            raise InputError(f"adversary {a} is not a node of the graph")
    normal = [i for i in range(schedule.n) if i not in bad]
    if not normal:
        raise ConfigError("run needs at least one normal node")
    if scope is not None:
        report = validate_scope(schedule, bad, scope)
        if not report.ok:
            if not cfg.force:
                raise ScopeViolationError(report)
            logger.warning("Running despite scope violation (forced): %s", report.describe())
    histories: Dict[int, List[float]] = {}
    for a, strategy in adversaries.items():
        histories[a] = [float(x[a])]
        x[a] = strategy.value(0.0, histories[a], 0.0)
        histories[a].append(float(x[a]))
    return schedule, x, normal, histories


def _emit_adversaries(nxt: np.ndarray, adversaries: Mapping[int, AdversaryStrategy],
                      histories: Dict[int, List[float]], t: float, dt: float) -> None:
    for a, strategy in adversaries.items():
        v = strategy.value(t, histories[a], dt)
        histories[a].append(v)
        nxt[a] = v


def _stop(rec: _Recorder, cfg: RunConfig) -> bool:
    return (cfg.stop_on_consensus and rec.settled()) or (cfg.stop_on_stall and rec.stalled())


# ---------- Runners ----------
def run_discrete(topology: Union[Digraph, SwitchingSchedule], protocol: ProtocolSpec,
                 adversaries: Mapping[int, AdversaryStrategy], init: Sequence[float],
                 cfg: Optional[RunConfig] = None, policy: Optional[WeightPolicy] = None,
                 scope: Optional[ThreatScope] = None) -> RunTrace:
    cfg = cfg or RunConfig(mode="discrete")
    policy = policy or WeightPolicy()
    schedule, x, normal, histories = _prepare(topology, adversaries, init, scope, cfg)
    policy.check_discrete(schedule.graphs())
    scale = max(abs(float(x[normal].min())), abs(float(x[normal].max())), np.finfo(float).tiny)
    rec = _Recorder(x, normal, cfg, settings.ENGINE.discrete_rounding_ulps * float(np.spacing(scale)))
    logger.info("Discrete run: %s, n=%d, %d adversaries, horizon=%d", protocol.label, schedule.n,
                len(adversaries), int(cfg.horizon))
    current = None
    for k in range(int(cfg.horizon)):
        if _stop(rec, cfg):
            break
        t = float(k)
        g = schedule.graph_at(t)
        if g is not current:
            logger.debug("Round %d: topology segment with %d arcs", k, len(g.edges))
            current = g
        nxt = x.copy()
        for i in normal:
            nxt[i], outcome = node_step(i, x, g, protocol, policy)
            rec.log_removed(t, i, outcome.removed)
        _emit_adversaries(nxt, adversaries, histories, t + 1, 1.0)
        x = nxt
        rec.push(t + 1, x)
    trace = rec.finish("discrete", protocol, list(adversaries), 1.0)
    logger.info("Finished after %d rounds: %s (psi=%.3g)", len(trace.times) - 1, trace.verdict.value,
                trace.psi[-1])
    return trace


def default_step(schedule: SwitchingSchedule, horizon: float, policy: WeightPolicy) -> float:
    d_max = schedule.max_in_degree()
    w_max = 1.0 if policy.rule == "uniform" else policy.beta
    dwell = _dwell(schedule)
    candidates = [horizon * settings.ENGINE.step_horizon_fraction, dwell * settings.ENGINE.dwell_fraction]
    if d_max:
        candidates.append(1.0 / (w_max * d_max))
    return float(min(candidates))


def _dwell(schedule: SwitchingSchedule) -> float:
    if schedule.dwell > 0:
        return schedule.dwell
    return schedule.min_segment_length()


def run_continuous(topology: Union[Digraph, SwitchingSchedule], protocol: ProtocolSpec,
                   adversaries: Mapping[int, AdversaryStrategy], init: Sequence[float],
                   cfg: Optional[RunConfig] = None, policy: Optional[WeightPolicy] = None,
                   scope: Optional[ThreatScope] = None) -> RunTrace:
    cfg = cfg or RunConfig(mode="continuous", horizon=10.0)
    policy = policy or WeightPolicy()
    schedule, x, normal, histories = _prepare(topology, adversaries, init, scope, cfg)
    policy.check_continuous(schedule.graphs())
    if schedule.dwell > 0 and not schedule.dwell_ok():
        raise ConfigError(f"schedule has a segment shorter than its dwell time {schedule.dwell}")
    dwell = _dwell(schedule)
    h = cfg.step if cfg.step is not None else default_step(schedule, cfg.horizon, policy)
    if h > dwell * settings.ENGINE.dwell_fraction:
        raise ConfigError(f"step {h} exceeds {settings.ENGINE.dwell_fraction:g} of the dwell time {dwell}")
    w_max = 1.0 if policy.rule == "uniform" else policy.beta
    if h * w_max * schedule.max_in_degree() > 1:
        logger.warning("Step %.4g with max in-degree %d is not a convex-combination step; safety may be lost",
                       h, schedule.max_in_degree())
    psi0_scale = float(x[normal].max() - x[normal].min())
    rec = _Recorder(x, normal, cfg, settings.ENGINE.continuous_safety_slack * psi0_scale)
    steps = int(math.ceil(cfg.horizon / h - 1e-9))
    logger.info("Continuous run: %s, n=%d, %d adversaries, horizon=%g, h=%.4g", protocol.label,
                schedule.n, len(adversaries), cfg.horizon, h)
    rates: List[np.ndarray] = []
    current = None
    for k in range(steps):
        if _stop(rec, cfg):
            break
        t = k * h
        g = schedule.graph_at(t)
        if g is not current:
            logger.debug("t=%.4g: topology segment with %d arcs", t, len(g.edges))
            current = g
        row = np.full(schedule.n, np.nan)
        nxt = x.copy()
        for i in normal:
            row[i], outcome = node_rate(i, x, g, protocol, policy)
            nxt[i] = x[i] + h * row[i]
            rec.log_removed(t, i, outcome.removed)
        rates.append(row)
        _emit_adversaries(nxt, adversaries, histories, (k + 1) * h, h)
        x = nxt
        rec.push((k + 1) * h, x)
    rate_arr = np.vstack(rates) if rates else np.empty((0, schedule.n))
    trace = rec.finish("continuous", protocol, list(adversaries), h, rates=rate_arr)
    logger.info("Finished at t=%.4g: %s (psi=%.3g)", trace.times[-1], trace.verdict.value, trace.psi[-1])
    return trace


def run(topology, protocol: ProtocolSpec, adversaries: Mapping[int, AdversaryStrategy], init,
        cfg: RunConfig, policy: Optional[WeightPolicy] = None, scope: Optional[ThreatScope] = None) -> RunTrace:
    runner = run_discrete if cfg.mode == "discrete" else run_continuous
    return runner(topology, protocol, adversaries, init, cfg, policy=policy, scope=scope)
