from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from config import settings
from src.engine.simulator import RunTrace, run
from src.outputs import report
from src.scenarios.parser import ScenarioConfig, load_scenario, scenario_hash
from src.types import RunSummary

logger = logging.getLogger(__name__)

SCENARIO_SUFFIX = ".scn"


def summarize_trace(trace: RunTrace, name: str = "") -> RunSummary:
    return trace.summary(name)


def _out_dir(cfg: ScenarioConfig, out_dir: Optional[Path]) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    if cfg.output:
        return Path(cfg.output)
    return settings.TRACES_DIR


def run_scenario(cfg: ScenarioConfig, write: bool = True,
                 out_dir: Optional[Path] = None) -> Tuple[RunSummary, RunTrace]:
    schedule = cfg.build_schedule()
    init = cfg.initial_state(schedule.n)
    trace = run(schedule, cfg.protocol, cfg.strategies(), init, cfg.run_config(),
                policy=cfg.weight_policy(), scope=cfg.scope)
    summary = summarize_trace(trace, cfg.name)
    if write:
        paths = report.write_run_outputs(trace, cfg.name, scenario_hash(cfg), _out_dir(cfg, out_dir))
        summary.trace_path = str(paths["trace"])
        summary.chart_path = str(paths["chart"])
    return summary, trace


def _error_row(cfg: ScenarioConfig, exc: Exception) -> RunSummary:
    return RunSummary(
        name=cfg.name,
        protocol=cfg.protocol.label,
        mode=cfg.mode,
        verdict="error",
        n=0,
        adversaries=len(cfg.adversaries),
        steps=0,
        final_time=0.0,
        psi0=float("nan"),
        psi_final=float("nan"),
        consensus_value=None,
        time_to_consensus=None,
        safety_violations=0,
        error=f"{type(exc).__name__}: {exc}",
    )


def _run_one(cfg: ScenarioConfig, write: bool, out_dir: Optional[Path]) -> RunSummary:
    started = time.perf_counter()
    try:
        summary, _ = run_scenario(cfg, write=write, out_dir=out_dir)
    except Exception as exc:  # noqa: BLE001
        logger.warning("Skipping %s due to error: %s", cfg.name, exc)
        return _error_row(cfg, exc)
    logger.debug("Run %s took %.2fs", cfg.name, time.perf_counter() - started)
    return summary


def run_batch(configs: Sequence[ScenarioConfig], parallelism: int = settings.DEFAULT_PARALLELISM,
              write: bool = True, out_dir: Optional[Path] = None) -> List[RunSummary]:
    """Run every config; rows come back in input order and failures become error rows."""
    if not configs:
        return []
    if parallelism <= 1:
        return [_run_one(cfg, write, out_dir) for cfg in configs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(_run_one, cfg, write, out_dir) for cfg in configs]
        return [f.result() for f in futures]


def load_batch(directory: Path | str) -> Tuple[List[ScenarioConfig], List[RunSummary]]:
    """Parse every scenario file in a directory; unparsable files come back as error rows."""
    configs: List[ScenarioConfig] = []
    failures: List[RunSummary] = []
    for path in sorted(Path(directory).glob(f"*{SCENARIO_SUFFIX}")):
        try:
            configs.append(load_scenario(path))
        except Exception as exc:  # noqa: BLE001
            logger.warning("Skipping %s due to error: %s", path.name, exc)
            failures.append(_error_row(ScenarioConfig(name=path.stem), exc))
    return configs, failures


def write_batch_reports(rows: List[RunSummary], out_dir: Optional[Path] = None) -> None:
    base = Path(out_dir) if out_dir is not None else settings.RESULTS_DIR
    report.export_tabular(rows, base / settings.SUMMARY_CSV.name, base / settings.SUMMARY_JSON.name)
    report.export_summary_html(rows, base / settings.SUMMARY_HTML.name)
