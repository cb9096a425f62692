"""
Main Entry Point

Command-line entry point: parses arguments, loads the scenario, sets up
logging and runs one experiment subcommand.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from .config import APP_NAME, APP_VERSION, default_thread_count, prepare_output_dir
from .core.errors import ConfigError
from .experiments.runner import COMMANDS, ExperimentRunner
from .logging_config import LOG_LEVELS, setup_logging, shutdown_logging
from .models.config import ScenarioConfig, load_config, validate_config
from .resources import DEFAULT_SCENARIO, resolve_config_path

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _seed(value: str) -> int:
    number = int(value)
    if not 0 <= number < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default=DEFAULT_SCENARIO,
        help=f"scenario JSON file or shipped scenario name (default: {DEFAULT_SCENARIO})",
    )
    common.add_argument("--seed", type=_seed, help="override the scenario seed")
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    common.add_argument("--threads", type=_positive_int, help="worker threads (default: physical cores)")
    common.add_argument("--log-level", choices=LOG_LEVELS, help="console log level")

    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description="Collaborative beamforming experiments for hovering UAV swarms.",
    )
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for command in COMMANDS:
        sub = subparsers.add_parser(command, parents=[common])
        if command == "reform-eval":
            sub.add_argument("--checkpoint", type=Path, help="evaluate this network instead of training")
    return parser


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    """File, then environment, then command-line flags."""
    config = load_config(resolve_config_path(args.config), environ=os.environ)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.log_level is not None:
        overrides["log_level"] = args.log_level
    if overrides:
        config = validate_config({**config.to_dict(), **overrides})
    return config


def run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    out_dir = prepare_output_dir(args.out)
    log_file = setup_logging(out_dir, config.log_level.value)
    logger = logging.getLogger(__name__)

    threads = args.threads or default_thread_count()
    runner = ExperimentRunner(config, out_dir, threads, getattr(args, "checkpoint", None))
    manifest = runner.run(args.command)
    if log_file is not None:
        manifest.log_files = sorted(p.name for p in out_dir.glob(f"{log_file.name}*"))
    path = manifest.write(out_dir)
    logger.info(f"Wrote {len(manifest.artifacts)} artifacts and {path.name} to {out_dir}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG

    logger = logging.getLogger(__name__)
    try:
        return run(args)
    except ConfigError as e:
        print(f"{APP_NAME}: error: {e}", file=sys.stderr)
        logger.debug("Configuration error", exc_info=True)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print(f"\n{APP_NAME}: interrupted", file=sys.stderr)
        return 130
    except Exception as e:
        print(f"{APP_NAME}: error: {e}", file=sys.stderr)
        logger.debug("Run failed", exc_info=True)
        return EXIT_RUNTIME
    finally:
        shutdown_logging()


if __name__ == "__main__":
    sys.exit(main())
