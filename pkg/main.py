from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from config import settings
from src.errors import ConsensusError
from src.graphs.digraph import Digraph, format_edge_list, load_edge_list
from src.graphs.robustness import grow_preferential, is_rs_robust, maximal_robustness
from src.outputs.report import summarize_to_console
from src.scenarios.batch import load_batch, run_batch, write_batch_reports
from src.scenarios.parser import NAMED_GRAPHS, ScenarioConfig, load_scenario
from src.scenarios.presets import PRESETS, preset, preset_variants
from src.types import RunSummary


logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FALSE = 4
_VERDICT_EXIT = {"consensus": 0, "stalled": 2, "safety-violated": 3, "error": 1}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_graph(token: str) -> Digraph:
    if token in NAMED_GRAPHS:
        return NAMED_GRAPHS[token]()
    return load_edge_list(token)


def _run_configs(configs: List[ScenarioConfig], parallelism: int, out_dir: Optional[Path], top: int) -> List[RunSummary]:
    rows = run_batch(configs, parallelism=parallelism, out_dir=out_dir)
    summarize_to_console(rows, top_n=top)
    return rows


def _worst_exit(rows: List[RunSummary]) -> int:
    return max((_VERDICT_EXIT.get(r.verdict, 1) for r in rows), default=EXIT_OK)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.file)
    if args.force:
        cfg = replace(cfg, force=True)
    rows = _run_configs([cfg], 1, args.output, args.top)
    if rows[0].error:
        logger.error("%s", rows[0].error)
    return _worst_exit(rows)


def cmd_preset(args: argparse.Namespace) -> int:
    configs = [preset(args.name, args.protocol)] if args.protocol else preset_variants(args.name)
    if args.force:
        configs = [replace(c, force=True) for c in configs]
    rows = _run_configs(configs, args.jobs, args.output, args.top)
    return _worst_exit(rows)


def cmd_check(args: argparse.Namespace) -> int:
    g = _load_graph(args.graph)
    if args.maximal:
        r_star, s_star = maximal_robustness(g, limit=args.limit)
        print(f"maximal {r_star} {s_star}")
        return EXIT_OK
    if args.r is None:
        raise ConsensusError("check needs --r (or --maximal)")
    cert = is_rs_robust(g, args.r, args.s, limit=args.limit)
    print(f"verdict {'true' if cert.verdict else 'false'}")
    print(f"r {cert.r}")
    print(f"s {cert.s}")
    if cert.witness is not None:
        s1, s2 = cert.witness
        print("witness_s1 " + " ".join(str(i) for i in sorted(s1)))
        print("witness_s2 " + " ".join(str(i) for i in sorted(s2)))
        print(f"reach {cert.reach[0]} {cert.reach[1]}")
    return EXIT_OK if cert.verdict else EXIT_CHECK_FALSE


def cmd_grow(args: argparse.Namespace) -> int:
    seed = _load_graph(args.seed_graph)
    result = grow_preferential(seed, args.r, args.s, args.count, args.rng,
                               attachments=args.attachments, limit=args.limit)
    text = format_edge_list(result.graph)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        logger.info("Wrote grown graph (%d nodes) -> %s", result.graph.n, args.out)
    else:
        sys.stdout.write(text)
    if args.verify:
        cert = is_rs_robust(result.graph, args.r, min(args.s, result.graph.n), limit=args.limit)
        logger.info("Grown graph %s", cert.describe())
        return EXIT_OK if cert.verdict else EXIT_CHECK_FALSE
    return EXIT_OK


def cmd_batch(args: argparse.Namespace) -> int:
    configs, failures = load_batch(args.directory)
    if args.force:
        configs = [replace(c, force=True) for c in configs]
    rows = failures + run_batch(configs, parallelism=args.jobs, out_dir=args.output)
    summarize_to_console(rows, top_n=args.top)
    write_batch_reports(rows)
    return _worst_exit(rows)


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = _Parser(prog="arcp", description="Resilient consensus simulator and robustness checker")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--limit", type=int, default=None,
                        help=f"robustness enumeration node limit (default {settings.ENUMERATION_LIMIT})")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def _run_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--force", action="store_true", help="run even when the threat scope is violated")
        p.add_argument("--output", type=Path, default=None, help=f"trace directory (default {settings.TRACES_DIR})")
        p.add_argument("--top", type=int, default=settings.TOP_N_DEFAULT, help="rows shown in the console summary")

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("file", type=Path)
    _run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_preset = sub.add_parser("preset", help="run a built-in scenario")
    p_preset.add_argument("name", choices=sorted(PRESETS))
    p_preset.add_argument("--protocol", choices=["arcp", "lcp"], default=None)
    p_preset.add_argument("-j", "--jobs", type=int, default=settings.DEFAULT_PARALLELISM)
    _run_flags(p_preset)
    p_preset.set_defaults(func=cmd_preset)

    p_check = sub.add_parser("check", help="decide (r,s)-robustness of a graph")
    p_check.add_argument("--graph", required=True, help="edge-list file or one of " + ", ".join(sorted(NAMED_GRAPHS)))
    p_check.add_argument("--r", type=int, default=None)
    p_check.add_argument("--s", type=int, default=1)
    p_check.add_argument("--maximal", action="store_true", help="report the maximal (r, s) pair")
    p_check.set_defaults(func=cmd_check)

    p_grow = sub.add_parser("grow", help="grow an (r,s)-robust graph by preferential attachment")
    p_grow.add_argument("--seed-graph", required=True)
    p_grow.add_argument("--r", type=int, required=True)
    p_grow.add_argument("--s", type=int, required=True)
    p_grow.add_argument("--count", type=int, required=True)
    p_grow.add_argument("--rng", type=int, default=0)
    p_grow.add_argument("--attachments", type=int, default=None, help="edges per new node (default r+s-1)")
    p_grow.add_argument("--out", type=str, default=None, help="write the edge list here instead of stdout")
    p_grow.add_argument("--verify", action="store_true", help="re-check the grown graph")
    p_grow.set_defaults(func=cmd_grow)

    p_batch = sub.add_parser("batch", help="run every *.scn file in a directory")
    p_batch.add_argument("directory", type=Path)
    p_batch.add_argument("-j", "--jobs", type=int, default=settings.DEFAULT_PARALLELISM)
    _run_flags(p_batch)
    p_batch.set_defaults(func=cmd_batch)

    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    if args.limit is not None:
        settings.ENUMERATION_LIMIT = args.limit
    try:
        return args.func(args)
    except ConsensusError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
