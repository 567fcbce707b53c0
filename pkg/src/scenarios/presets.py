from __future__ import annotations

import logging
from dataclasses import replace
from typing import Callable, Dict, List, Optional

from src.adversaries.scope import ThreatScope, validate_scope
from src.adversaries.strategies import Constant
from src.errors import ConfigError
from src.graphs.robustness import is_r_robust, is_rs_robust
from src.protocols.updates import ProtocolSpec
from src.scenarios.parser import GraphSpec, ScenarioConfig

logger = logging.getLogger(__name__)

SEC6_BODY = 14
SEC6_RNG = 11
GROW_K5_RNG = 7


def _prop1_two_clique() -> ScenarioConfig:
    # X = 0..3 held at 0, Y = 4..8 held at 1; no adversaries at all.
    return ScenarioConfig(
        name="prop1-two-clique",
        graph=GraphSpec("two-clique", ("4", "5", "2")),
        protocol=ProtocolSpec("arcp", 2),
        mode="discrete",
        horizon=1000.0,
        init_mode="values",
        init_values=(0.0,) * 4 + (1.0,) * 5,
    )


def _fig2_local() -> ScenarioConfig:
    return ScenarioConfig(
        name="fig2-local",
        graph=GraphSpec("named", ("fig2-local",)),
        protocol=ProtocolSpec("arcp", 1),
        adversaries=((5, Constant(2.0)), (6, Constant(-1.0))),
        scope=ThreatScope("local", 1),
        mode="discrete",
        horizon=5000.0,
        init_mode="spread",
        init_range=(0.0, 1.0),
        seed=3,
    )


def _grow_k5() -> ScenarioConfig:
    return ScenarioConfig(
        name="grow-k5",
        graph=GraphSpec("grow", ("K5", "3", "2", "5", str(GROW_K5_RNG), "attach", "4")),
        protocol=ProtocolSpec("arcp", 1),
        adversaries=((9, Constant(2.0)),),
        scope=ThreatScope("total", 1),
        mode="discrete",
        horizon=5000.0,
        init_mode="spread",
        init_range=(0.0, 1.0),
        seed=5,
    )


def _sec6_hub() -> ScenarioConfig:
    return ScenarioConfig(
        name="sec6-hub",
        graph=GraphSpec("hub", (str(SEC6_BODY), "2", "2", str(SEC6_RNG))),
        protocol=ProtocolSpec("arcp", 1),
        adversaries=((SEC6_BODY, Constant(2.0)),),
        scope=ThreatScope("total", 1),
        mode="continuous",
        horizon=120.0,
        step=0.02,
        init_mode="spread",
        init_range=(0.0, 1.0),
        seed=6,
        stop_on_consensus=False,
        stop_on_stall=False,
    )


PRESETS: Dict[str, Callable[[], ScenarioConfig]] = {
    "prop1-two-clique": _prop1_two_clique,
    "fig2-local": _fig2_local,
    "grow-k5": _grow_k5,
    "sec6-hub": _sec6_hub,
}


def _certify(cfg: ScenarioConfig) -> None:
    g = cfg.build_schedule().graph_at(0.0)
    adversaries = [a for a, _ in cfg.adversaries]
    if cfg.name == "prop1-two-clique":
        ok = is_r_robust(g, 2).verdict and not is_r_robust(g, 3).verdict
        claim = "2-robust but not 3-robust"
    elif cfg.name == "fig2-local":
        ok = is_r_robust(g, 3).verdict
        claim = "3-robust"
    elif cfg.name == "grow-k5":
        ok = is_rs_robust(g, 3, 2).verdict
        claim = "(3,2)-robust"
    else:
        hub = adversaries[0]
        ok = is_rs_robust(g, 2, 2).verdict and g.degree(hub) == max(g.degree(i) for i in g.nodes)
        claim = "(2,2)-robust with a maximal-degree hub"
    if cfg.scope is not None:
        report = validate_scope(g, adversaries, cfg.scope)
        ok = ok and report.ok
        claim += f", adversaries within {cfg.scope.label}"
    if not ok:
        raise ConfigError(f"preset {cfg.name} failed certification ({claim})")
    logger.info("Preset %s certified: %s", cfg.name, claim)


def preset(name: str, protocol: Optional[str] = None) -> ScenarioConfig:
    builder = PRESETS.get(name)
    if builder is None:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    cfg = builder()
    _certify(cfg)
    if protocol is None or protocol == cfg.protocol.kind:
        return cfg
    if protocol == "lcp":
        return replace(cfg, name=f"{cfg.name}-lcp", protocol=ProtocolSpec("lcp"))
    if protocol == "arcp":
        return replace(cfg, name=f"{cfg.name}-arcp", protocol=ProtocolSpec("arcp", max(cfg.protocol.F, 1)))
    raise ConfigError(f"unknown protocol {protocol!r}")


def preset_variants(name: str) -> List[ScenarioConfig]:
    """Both protocol variants for sec6-hub; the single preset otherwise."""
    if name == "sec6-hub":
        return [preset(name, "lcp"), preset(name)]
    return [preset(name)]
