from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from src.adversaries.scope import ThreatScope
from src.adversaries.strategies import AdversaryStrategy, format_strategy, parse_strategy
from src.engine.simulator import RunConfig
from src.errors import ConfigError, InputError, ScenarioParseError
from src.graphs.digraph import Digraph, SwitchingSchedule, complete_graph, load_edge_list
from src.graphs.generators import fig1_graph, fig2_graph, fig2_local_graph, hub_graph, two_clique
from src.graphs.robustness import grow_preferential
from src.protocols.updates import ProtocolSpec
from src.protocols.weights import WeightPolicy

logger = logging.getLogger(__name__)

NAMED_GRAPHS = {"fig1": fig1_graph, "fig2": fig2_graph, "fig2-local": fig2_local_graph}
INIT_MODES = ("values", "random", "spread")
_COMPLETE_SEED = re.compile(r"^[Kk](\d+)$")


def _num(v: float) -> str:
    return repr(float(v))


# ---------- Graph sources ----------
@dataclass(frozen=True)
class GraphSpec:
    kind: str
    args: Tuple[str, ...] = ()

    def tokens(self) -> List[str]:
        return [self.kind, *self.args]

    def build(self, base_dir: Optional[Path] = None,
              arcs: Sequence[Tuple[int, int, bool]] = ()) -> Digraph:
        a = self.args
        if self.kind == "complete":
            return complete_graph(int(a[0]))
        if self.kind == "two-clique":
            return two_clique(int(a[0]), int(a[1]), int(a[2]))
        if self.kind == "named":
            if a[0] not in NAMED_GRAPHS:
                raise ConfigError(f"unknown named graph {a[0]!r}; expected one of {sorted(NAMED_GRAPHS)}")
            return NAMED_GRAPHS[a[0]]()
        if self.kind == "file":
            path = Path(a[0])
            if not path.is_absolute() and base_dir is not None:
                path = Path(base_dir) / path
            return load_edge_list(path)
        if self.kind == "grow":
            seed = _seed_graph(a[0], base_dir)
            attach = int(a[6]) if len(a) > 6 and a[5] == "attach" else None
            return grow_preferential(seed, int(a[1]), int(a[2]), int(a[3]), int(a[4]), attachments=attach).graph
        if self.kind == "hub":
            return hub_graph(int(a[0]), int(a[1]), int(a[2]), int(a[3]))
        if self.kind == "edges":
            n = int(a[0])
            out = set()
            for u, v, directed in arcs:
                out.add((u, v))
                if not directed:
                    out.add((v, u))
            return Digraph(n, frozenset(out))
        raise ConfigError(f"unknown graph source {self.kind!r}")


_GRAPH_ARITY = {"complete": 1, "two-clique": 3, "named": 1, "file": 1, "grow": 5, "hub": 4, "edges": 1}


def _seed_graph(token: str, base_dir: Optional[Path]) -> Digraph:
    match = _COMPLETE_SEED.match(token)
    if match:
        return complete_graph(int(match.group(1)))
    if token in NAMED_GRAPHS:
        return NAMED_GRAPHS[token]()
    return GraphSpec("file", (token,)).build(base_dir)


def _graph_spec(tokens: Sequence[str]) -> GraphSpec:
    if not tokens:
        raise ConfigError("missing graph source")
    kind, args = tokens[0], tuple(tokens[1:])
    if kind not in _GRAPH_ARITY:
        raise ConfigError(f"unknown graph source {kind!r}; expected one of {sorted(_GRAPH_ARITY)}")
    if len(args) < _GRAPH_ARITY[kind]:
        raise ConfigError(f"graph {kind} needs {_GRAPH_ARITY[kind]} arguments, got {len(args)}")
    return GraphSpec(kind, args)


# ---------- Scenario ----------
@dataclass
class ScenarioConfig:
    name: str = "scenario"
    graph: Optional[GraphSpec] = None
    edges: Tuple[Tuple[int, int, bool], ...] = ()
    segments: Tuple[Tuple[float, GraphSpec], ...] = ()
    dwell: float = 0.0
    protocol: ProtocolSpec = field(default_factory=ProtocolSpec)
    weight_rule: str = "uniform"
    alpha: Optional[float] = None
    beta: float = settings.DEFAULT_BETA
    weight_table: Tuple[Tuple[int, int, float], ...] = ()
    adversaries: Tuple[Tuple[int, AdversaryStrategy], ...] = ()
    scope: Optional[ThreatScope] = None
    mode: str = "discrete"
    horizon: float = 1000.0
    step: Optional[float] = None
    consensus_tol: Optional[float] = None
    stall_window: int = settings.ENGINE.stall_window
    init_mode: str = "spread"
    init_values: Tuple[float, ...] = ()
    init_range: Tuple[float, float] = (0.0, 1.0)
    seed: int = 0
    output: Optional[str] = None
    stop_on_consensus: bool = True
    stop_on_stall: bool = True
    force: bool = False
    base_dir: Optional[str] = field(default=None, compare=False)

    # ---------- Derived run inputs ----------
    def build_schedule(self) -> SwitchingSchedule:
        base = Path(self.base_dir) if self.base_dir else None
        if self.segments:
            built = tuple((t, spec.build(base, self.edges)) for t, spec in self.segments)
            return SwitchingSchedule(built, dwell=self.dwell)
        if self.graph is None:
            raise ConfigError(f"scenario {self.name!r} has no graph")
        return SwitchingSchedule(((0.0, self.graph.build(base, self.edges)),), dwell=self.dwell)

    def strategies(self) -> Dict[int, AdversaryStrategy]:
        return dict(self.adversaries)

    def weight_policy(self) -> WeightPolicy:
        table = {(i, j): w for i, j, w in self.weight_table}
        return WeightPolicy(alpha=self.alpha, beta=self.beta, rule=self.weight_rule, table=table)

    def run_config(self) -> RunConfig:
        return RunConfig(
            mode=self.mode,
            horizon=self.horizon,
            step=self.step,
            consensus_tol=self.consensus_tol,
            stall_window=self.stall_window,
            stop_on_consensus=self.stop_on_consensus,
            stop_on_stall=self.stop_on_stall,
            force=self.force,
        )

    def initial_state(self, n: int) -> np.ndarray:
        lo, hi = self.init_range
        if self.init_mode == "values":
            if len(self.init_values) != n:
                raise ConfigError(f"init lists {len(self.init_values)} values for {n} nodes")
            return np.array(self.init_values, dtype=float)
        rng = np.random.default_rng(self.seed)
        if self.init_mode == "random":
            return rng.uniform(lo, hi, size=n)
        bad = {a for a, _ in self.adversaries}
        normal = [i for i in range(n) if i not in bad]
        x = np.full(n, (lo + hi) / 2.0)
        x[normal] = rng.permutation(np.linspace(lo, hi, len(normal)))
        return x


# ---------- Text codec ----------
def _bool(token: str) -> bool:
    low = token.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected true/false, got {token!r}")


def _optional_float(token: str) -> Optional[float]:
    return None if token.lower() == "none" else float(token)


def _arity(args: Sequence[str], count: int, usage: str, exact: bool = True) -> None:
    if len(args) < count or (exact and len(args) != count):
        raise ConfigError(usage)


def _run_field(name: str, value):
    """Validate one run setting through RunConfig so the error lands on its own line."""
    RunConfig(**{name: value})
    return value


class _Builder:
    def __init__(self) -> None:
        self.values: Dict[str, object] = {}
        self.edges: List[Tuple[int, int, bool]] = []
        self.segments: List[Tuple[float, GraphSpec]] = []
        self.table: List[Tuple[int, int, float]] = []
        self.adversaries: List[Tuple[int, AdversaryStrategy]] = []
        self.lines: Dict[str, int] = {}
        self.adversary_lines: Dict[int, int] = {}
        self.weight_lines: List[int] = []
        self.protocol: Tuple[str, int] = ("arcp", 0)

    def handle(self, key: str, args: List[str], lineno: int) -> None:
        handler = getattr(self, "_k_" + key.replace("-", "_"), None)
        if handler is None:
            raise ConfigError(f"unknown key {key!r}")
        handler(args, lineno)
        self.lines.setdefault(key, lineno)

    def _one(self, args: List[str], key: str) -> str:
        if len(args) != 1:
            raise ConfigError(f"'{key}' takes exactly one value")
        return args[0]

    def _k_name(self, args, lineno):
        self.values["name"] = " ".join(args)

    def _k_graph(self, args, lineno):
        self.values["graph"] = _graph_spec(args)

    def _k_edge(self, args, lineno):
        _arity(args, 2, "edge lines read 'edge U V'")
        self.edges.append((int(args[0]), int(args[1]), False))

    def _k_arc(self, args, lineno):
        if len(args) != 3 or args[1] != "->":
            raise ConfigError("arc lines read 'arc U -> V'")
        self.edges.append((int(args[0]), int(args[2]), True))

    def _k_segment(self, args, lineno):
        _arity(args, 2, "segment lines read 'segment START GRAPH...'", exact=False)
        self.segments.append((float(args[0]), _graph_spec(args[1:])))

    def _k_dwell(self, args, lineno):
        dwell = float(self._one(args, "dwell"))
        if dwell < 0:
            raise ConfigError(f"dwell must be non-negative, got {dwell}")
        self.values["dwell"] = dwell

    def _k_protocol(self, args, lineno):
        if len(args) not in (1, 2):
            raise ConfigError("protocol lines read 'protocol arcp F' or 'protocol lcp'")
        kind = args[0]
        F = int(args[1]) if len(args) > 1 else 0
        self.values["protocol"] = ProtocolSpec(kind, F)

    def _k_weights(self, args, lineno):
        self.values["weight_rule"] = self._one(args, "weights")

    def _k_weight(self, args, lineno):
        _arity(args, 3, "weight lines read 'weight I J W'")
        self.table.append((int(args[0]), int(args[1]), float(args[2])))
        self.weight_lines.append(lineno)

    def _k_alpha(self, args, lineno):
        self.values["alpha"] = _optional_float(self._one(args, "alpha"))

    def _k_beta(self, args, lineno):
        self.values["beta"] = float(self._one(args, "beta"))

    def _k_adversary(self, args, lineno):
        _arity(args, 2, "adversary lines read 'adversary ID STRATEGY ...'", exact=False)
        node = int(args[0])
        if node in self.adversary_lines:
            raise ConfigError(f"adversary {node} declared twice")
        self.adversaries.append((node, parse_strategy(args[1:])))
        self.adversary_lines[node] = lineno

    def _k_scope(self, args, lineno):
        if len(args) != 2:
            raise ConfigError("scope lines read 'scope total|local F'")
        self.values["scope"] = ThreatScope(args[0], int(args[1]))

    def _k_mode(self, args, lineno):
        self.values["mode"] = _run_field("mode", self._one(args, "mode"))

    def _k_horizon(self, args, lineno):
        self.values["horizon"] = _run_field("horizon", float(self._one(args, "horizon")))

    def _k_step(self, args, lineno):
        self.values["step"] = _run_field("step", _optional_float(self._one(args, "step")))

    def _k_consensus_tol(self, args, lineno):
        self.values["consensus_tol"] = _run_field("consensus_tol", _optional_float(self._one(args, "consensus_tol")))

    def _k_stall_window(self, args, lineno):
        self.values["stall_window"] = _run_field("stall_window", int(self._one(args, "stall_window")))

    def _k_init(self, args, lineno):
        if args and args[0] in ("random", "spread"):
            if len(args) != 3:
                raise ConfigError(f"init {args[0]} needs LO HI")
            self.values["init_mode"] = args[0]
            self.values["init_range"] = (float(args[1]), float(args[2]))
            return
        if not args:
            raise ConfigError("init needs values")
        self.values["init_mode"] = "values"
        self.values["init_values"] = tuple(float(v) for v in args)

    def _k_seed(self, args, lineno):
        self.values["seed"] = int(self._one(args, "seed"))

    def _k_output(self, args, lineno):
        self.values["output"] = self._one(args, "output")

    def _k_stop_on_consensus(self, args, lineno):
        self.values["stop_on_consensus"] = _bool(self._one(args, "stop_on_consensus"))

    def _k_stop_on_stall(self, args, lineno):
        self.values["stop_on_stall"] = _bool(self._one(args, "stop_on_stall"))

    def _k_force(self, args, lineno):
        self.values["force"] = _bool(self._one(args, "force"))


def _validate(cfg: ScenarioConfig, b: _Builder, errors: List[Tuple[int, str]]) -> None:
    graph_line = b.lines.get("graph", b.lines.get("segment", 0))
    if cfg.graph is None and not cfg.segments:
        errors.append((0, "missing required key 'graph' (or 'segment')"))
        return
    if cfg.graph is not None and cfg.segments:
        errors.append((b.lines["segment"], "use either 'graph' or 'segment' lines, not both"))
        return
    uses_edges = (cfg.graph is not None and cfg.graph.kind == "edges") or any(
        spec.kind == "edges" for _, spec in cfg.segments)
    if cfg.edges and not uses_edges:
        errors.append((b.lines.get("edge", b.lines.get("arc", 0)), "edge lines need 'graph edges N'"))
    if cfg.init_mode not in INIT_MODES:
        errors.append((b.lines.get("init", 0), f"unknown init mode {cfg.init_mode!r}"))
    if cfg.weight_rule == "custom" and not cfg.weight_table:
        errors.append((b.lines.get("weights", 0), "custom weights need 'weight I J W' lines"))
    try:
        schedule = cfg.build_schedule()
    except (ConfigError, InputError, OSError, ValueError, IndexError) as exc:
        errors.append((graph_line, f"cannot build graph: {exc}"))
        return
    n = schedule.n
    for node, _ in cfg.adversaries:
        if not (0 <= node < n):
            errors.append((b.adversary_lines[node], f"adversary {node} is not a node of the {n}-node graph"))
    arcs = set().union(*(g.edges for g in schedule.graphs()))
    for (i, j, _), line in zip(cfg.weight_table, b.weight_lines):
        if (j, i) not in arcs:
            errors.append((line, f"weight for {i} <- {j} names an arc that is not in the graph"))
    if cfg.init_mode == "values" and len(cfg.init_values) != n:
        errors.append((b.lines["init"], f"init lists {len(cfg.init_values)} values for {n} nodes"))


def parse_scenario(text: str, base_dir: Optional[Path | str] = None) -> ScenarioConfig:
    b = _Builder()
    errors: List[Tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *args = line.split()
        try:
            b.handle(key, args, lineno)
        except (ConfigError, ValueError) as exc:
            errors.append((lineno, str(exc) or f"bad value for {key!r}"))
        except IndexError:
            errors.append((lineno, f"too few values for {key!r}"))
    if errors:
        raise ScenarioParseError(errors)
    values = dict(b.values)
    values.update(
        edges=tuple(b.edges),
        segments=tuple(b.segments),
        weight_table=tuple(b.table),
        adversaries=tuple(b.adversaries),
        base_dir=str(base_dir) if base_dir is not None else None,
    )
    cfg = ScenarioConfig(**values)
    _validate(cfg, b, errors)
    if errors:
        raise ScenarioParseError(errors)
    return cfg


def load_scenario(path: Path | str) -> ScenarioConfig:
    path = Path(path)
    cfg = parse_scenario(path.read_text(), base_dir=path.parent)
    if cfg.name == "scenario":
        cfg.name = path.stem
    return cfg


def format_scenario(cfg: ScenarioConfig) -> str:
    out = [f"name {cfg.name}"]
    if cfg.graph is not None:
        out.append("graph " + " ".join(cfg.graph.tokens()))
    for u, v, directed in cfg.edges:
        out.append(f"arc {u} -> {v}" if directed else f"edge {u} {v}")
    for start, spec in cfg.segments:
        out.append(f"segment {_num(start)} " + " ".join(spec.tokens()))
    out.append(f"dwell {_num(cfg.dwell)}")
    proto = cfg.protocol
    out.append(f"protocol arcp {proto.F}" if proto.kind == "arcp" else "protocol lcp")
    out.append(f"weights {cfg.weight_rule}")
    for i, j, w in cfg.weight_table:
        out.append(f"weight {i} {j} {_num(w)}")
    out.append("alpha none" if cfg.alpha is None else f"alpha {_num(cfg.alpha)}")
    out.append(f"beta {_num(cfg.beta)}")
    for node, strategy in cfg.adversaries:
        out.append(f"adversary {node} {format_strategy(strategy)}")
    if cfg.scope is not None:
        out.append(f"scope {cfg.scope.kind} {cfg.scope.F}")
    out.append(f"mode {cfg.mode}")
    out.append(f"horizon {_num(cfg.horizon)}")
    out.append("step none" if cfg.step is None else f"step {_num(cfg.step)}")
    out.append("consensus_tol none" if cfg.consensus_tol is None else f"consensus_tol {_num(cfg.consensus_tol)}")
    out.append(f"stall_window {cfg.stall_window}")
    if cfg.init_mode == "values":
        out.append("init " + " ".join(_num(v) for v in cfg.init_values))
    else:
        lo, hi = cfg.init_range
        out.append(f"init {cfg.init_mode} {_num(lo)} {_num(hi)}")
    out.append(f"seed {cfg.seed}")
    if cfg.output:
        out.append(f"output {cfg.output}")
    out.append(f"stop_on_consensus {str(cfg.stop_on_consensus).lower()}")
    out.append(f"stop_on_stall {str(cfg.stop_on_stall).lower()}")
    out.append(f"force {str(cfg.force).lower()}")
    return "\n".join(out) + "\n"


def scenario_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha1(format_scenario(cfg).encode("utf-8")).hexdigest()[:10]
