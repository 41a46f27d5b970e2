"""Command-line front end: ``morsepi <critical|moduli|walk|pi1|push> --scenario FILE``."""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

from morsepi.crocodile.functorial import BUILTIN_MAPS
from morsepi.exceptions import MorsePiError, ScenarioError, ValidationError
from morsepi.factory import create_pipeline
from morsepi.observability.logging import get_logger
from morsepi.report import EXIT_REGULARITY, EXIT_USAGE

logger = get_logger(__name__)

SUBCOMMANDS = ("critical", "moduli", "walk", "pi1", "push")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="morsepi", description="Fundamental groups from stable Morse data.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Pipeline stage to run up to")
    parser.add_argument("--scenario", required=True, type=Path, help="Scenario file")
    parser.add_argument("--out", type=Path, default=None, help="Artifact directory")
    parser.add_argument("--seed", type=int, default=None, help="Sampling seed")
    parser.add_argument("--grid", type=int, default=None, help="Shooting grid resolution")
    parser.add_argument("--max-rel-len", type=int, default=None, help="Harvested word length bound")
    parser.add_argument("--map", default="identity", choices=BUILTIN_MAPS, help="Map for push")
    parser.add_argument(
        "--no-type2", action="store_true", help="Skip contraction relators (negative control for pi1)"
    )
    return parser


def exit_status(error: MorsePiError) -> int:
    """Input errors are usage errors; every numeric failure counts as a regularity failure."""
    if isinstance(error, (ScenarioError, ValidationError)):
        return EXIT_USAGE
    return EXIT_REGULARITY


async def run(args: argparse.Namespace) -> int:
    pipeline = create_pipeline(args.scenario, args.seed, args.grid, args.max_rel_len, args.out)
    options: dict = {}
    if args.subcommand == "pi1":
        options["include_type2"] = not args.no_type2
    elif args.subcommand == "push":
        options["map_name"] = args.map
    report = await pipeline.run(args.subcommand, **options)
    report.write(pipeline.settings.output_dir)
    sys.stdout.write(report.text())
    return report.exit_status


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and args.seed < 0:
        build_parser().error("--seed must be non-negative")
    for flag in ("grid", "max_rel_len"):
        value = getattr(args, flag)
        if value is not None and value <= 0:
            build_parser().error(f"--{flag.replace('_', '-')} must be positive")
    try:
        return asyncio.run(run(args))
    except MorsePiError as e:
        status = exit_status(e)
        logger.error("Run failed", error_code=e.error_code, error=e.message, details=e.details, exit_status=status)
        print(f"error [{e.error_code}]: {e.message}", file=sys.stderr)
        for key, value in sorted(e.details.items()):
            print(f"  {key}: {value}", file=sys.stderr)
        return status


if __name__ == "__main__":
    sys.exit(main())
