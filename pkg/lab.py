# lab.py: command-line ingang van het lab.
#   python lab.py run --scenario scenarios/bunching.toml --out out/
#   python lab.py verify [--tol composition=1e-12 ...] [--only exclusion bunching]
#   python lab.py scan --seeds 50
# Exitcodes: 0 = ok, 1 = criterium of analyse faalt, 2 = gebruik / scenariofout.
from __future__ import annotations

import argparse
import logging
import sys
from typing import Dict, List, Optional

import pandas as pd

from acceptance import CRITERIA, verify
from analyses import run
from common import DEFAULT_TOLERANCES, AnalysisError, ScenarioError, configure_logging
from consistency import default_registry, random_scenarios, scan_candidates, survivors
from scenario import load_scenario

logger = logging.getLogger("lab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _tolerance(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key = key.strip()
    if key not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(f"unknown tolerance {key!r} (known: {', '.join(DEFAULT_TOLERANCES)})")
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {key} needs a number, got {value!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"tolerance {key} must be > 0")
    return key, v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description="Identical-particle lab: scenarios, checks and scans.")
    parser.add_argument("--log-level", default=None, help="logging level (default: LAB_LOG_LEVEL or WARNING)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the analyses of one scenario file")
    p_run.add_argument("--scenario", required=True, help="scenario file (TOML)")
    p_run.add_argument("--out", required=True, help="output directory, one CSV per analysis")

    p_verify = sub.add_parser("verify", help="run the built-in acceptance suite")
    p_verify.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="KEY=VALUE",
                          help="override one tolerance (repeatable)")
    p_verify.add_argument("--only", nargs="+", choices=list(CRITERIA), metavar="NAME",
                          help=f"run only these criteria ({', '.join(CRITERIA)})")

    p_scan = sub.add_parser("scan", help="falsification scan of the candidate registry")
    p_scan.add_argument("--seeds", type=int, required=True, help="number of random composition scenarios")
    p_scan.add_argument("--seed", type=int, default=0, help="root seed")
    return parser


def cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        tables = run(scenario, args.out)
    except AnalysisError as e:
        print(f"analysis failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    for t in tables:
        print(f"{t.name}: {len(t.rows)} rows -> {args.out}/{t.name}.csv")
    return EXIT_OK


def cmd_verify(args) -> int:
    overrides: Dict[str, float] = dict(args.tol)
    results = verify(overrides, args.only)
    for r in results:
        print(r.line())
    failed: List[str] = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_scan(args) -> int:
    if args.seeds < 1:
        print("--seeds must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    scan = scan_candidates(default_registry(), random_scenarios(args.seeds, args.seed), seed=args.seed)
    frame = pd.DataFrame([s.record() for s in scan])
    print(frame.to_string(index=False))
    alive = survivors(scan)
    print(f"survivors: {' '.join(alive) or '-'}")
    return EXIT_OK if sorted(alive) == ["minus", "plus"] else EXIT_FAIL


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "scan": cmd_scan}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse: 0 bij --help, 2 bij gebruiksfouten
        return int(e.code or 0)
    configure_logging(args.log_level)
    logger.debug("command %s", args.command)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
