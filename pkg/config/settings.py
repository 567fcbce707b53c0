from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv


BASE_DIR = Path(__file__).resolve().parent.parent

# .env is optional; real environment variables win over it.
load_dotenv(BASE_DIR / ".env", override=False)

RESULTS_DIR = Path(os.environ.get("ARCP_OUTPUT_DIR", BASE_DIR / "results"))
TRACES_DIR = RESULTS_DIR / "traces"
SUMMARY_CSV = RESULTS_DIR / "summary.csv"
SUMMARY_JSON = RESULTS_DIR / "summary.json"
SUMMARY_HTML = RESULTS_DIR / "summary.html"

# Per-run output names, keyed by scenario name + hash.
TRACE_FILE_TEMPLATE = "{name}_{digest}_trace.csv"
REMOVED_FILE_TEMPLATE = "{name}_{digest}_removed.csv"
GNUPLOT_FILE_TEMPLATE = "{name}_{digest}.gp"
CHART_FILE_TEMPLATE = "{name}_{digest}.html"


# Subset enumeration cap for the robustness checker. Cost grows like 3^n.
ENUMERATION_LIMIT = int(os.environ.get("ARCP_ENUMERATION_LIMIT", "15"))


@dataclass(frozen=True)
class EngineDefaults:
    consensus_rtol: float = 1e-6
    stall_window: int = 100
    stall_eps: float = 1e-12
    continuous_safety_slack: float = 1e-9  # relative to Psi[0]
    discrete_rounding_ulps: int = 8
    rate_bound_slack: float = 1e-12
    step_horizon_fraction: float = 1e-4
    dwell_fraction: float = 0.1


ENGINE = EngineDefaults()

# Continuous-mode weight ceiling; the uniform continuous rule uses unit weights.
DEFAULT_BETA = 1.0

# pull(target) default approach rate per unit time (or per round).
DEFAULT_PULL_RATE = 0.5

# Values used by the necessity attack construction.
ATTACK_LOW = 0.0
ATTACK_HIGH = 1.0
ATTACK_INTERIOR = 0.5

# Export controls
TOP_N_DEFAULT = 20
PLOTLY_MAX_NODES = 40

DEFAULT_PARALLELISM = 1
