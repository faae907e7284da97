#!/usr/bin/env python3
"""
eqkit command line: run a configuration, list and describe built-in games,
validate a configuration without running it.

Exit codes: 0 when every requested analysis completed, 1 when at least one
failed or was skipped, 2 on configuration errors.
"""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .config import load_config
from .errors import ConfigError, MissingResultError
from .games import describe_game, list_games
from .report import available_csvs, emit_csv, write_report
from .runner import AnalysisRunner

logger = logging.getLogger("eqkit")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eqkit", description="Equilibrium analysis for strategic-form games")
    parser.add_argument("--version", action="version", version=f"eqkit {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run the analyses of a configuration file")
    run.add_argument("config", type=Path)
    run.add_argument("--out", help="Output directory (overrides output_dir)")
    run.add_argument("--seed", type=int, help="Random seed (overrides seed)")
    run.add_argument("--verbose", "-v", action="store_true", help="Debug logging")

    commands.add_parser("list-games", help="List the built-in games")

    describe = commands.add_parser("describe", help="Show a game's parameters and defaults")
    describe.add_argument("game")

    validate = commands.add_parser("validate", help="Parse a configuration and print it with defaults filled in")
    validate.add_argument("config", type=Path)
    return parser


async def run_command(args: argparse.Namespace) -> int:
    config = load_config(args.config, seed=args.seed, output_dir=args.out)
    runner = AnalysisRunner(config)
    report = await runner.run()

    out = Path(config.output_dir)
    write_report(report, out)
    for which in available_csvs(report):
        try:
            emit_csv(report, which, out)
        except MissingResultError as e:
            logger.warning(f"No {which} CSV: {e}")

    for name, message in report.errors.items():
        print(f"{name}: {message}", file=sys.stderr)
    for name, reason in report.skipped.items():
        print(f"{name}: skipped, {reason}", file=sys.stderr)
    print(f"Report written to {out / 'report.json'}")
    return EXIT_OK if report.completed else EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(getattr(args, "verbose", False))

    try:
        if args.command == "run":
            logger.info(f"Starting eqkit {__version__}")
            return asyncio.run(run_command(args))
        elif args.command == "list-games":
            for entry in list_games():
                print(f"{entry.name:<20} {entry.description}")
            return EXIT_OK
        elif args.command == "describe":
            print(describe_game(args.game))
            return EXIT_OK
        elif args.command == "validate":
            config = load_config(args.config)
            print(json.dumps(config.echo(), indent=2))
            return EXIT_OK
        else:
            raise ValueError(f"Unknown command: {args.command}")
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
