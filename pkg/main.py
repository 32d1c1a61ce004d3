"""
Main Execution Script
CLI interface for the Periodic Homogenization Toolkit
"""
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

import config
from errors import ConfigError, HomogenizationError
from harness.orchestrator import COMMANDS, g0_text, run_study
from harness.study_config import parse_config


def setup_logging(log_level: str = "INFO", debug: bool = False):
    """Setup logging configuration"""
    if debug:
        log_level = "DEBUG"

    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format=config.LOG_CONFIG["log_format"],
        datefmt=config.LOG_CONFIG["date_format"],
        handlers=[
            logging.FileHandler(config.LOG_CONFIG["processing_log"]),
            logging.StreamHandler(sys.stdout)
        ]
    )
    for name, path in (("solver_errors", config.LOG_CONFIG["solver_errors_log"]),
                       ("config_errors", config.LOG_CONFIG["config_errors_log"])):
        error_logger = logging.getLogger(name)
        if not error_logger.handlers:
            handler = logging.FileHandler(path)
            handler.setFormatter(logging.Formatter(config.LOG_CONFIG["log_format"], config.LOG_CONFIG["date_format"]))
            error_logger.addHandler(handler)


def resolve_threads(requested: Optional[int], configured: Optional[int]) -> int:
    """--threads, then the environment variable, then the configuration, then 1"""
    if requested:
        return max(1, requested)
    from_env = os.environ.get(config.THREADS_ENV_VAR)
    if from_env:
        try:
            return max(1, int(from_env))
        except ValueError:
            raise ConfigError(f"{config.THREADS_ENV_VAR}={from_env!r} is not an integer") from None
    return max(1, configured or config.STUDY_DEFAULTS["threads"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Periodic Homogenization Toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    descriptions = {
        "cell": "Solve the cell problem and print the effective data",
        "check": "Run the property suite on a configuration",
        "wholespace-rates": "eps-rates of the torus-surrogate resolvent errors",
        "neumann-rates": "eps-rates of the bounded-domain Neumann errors",
        "zeta-sweep": "Error scaling in the shift parameter",
        "spectrum": "Kernel of b(D), first nonzero eigenvalues and c_flat",
    }
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=descriptions[command])
        sub.add_argument("--config", type=str, required=True,
                         help="Study configuration (JSON path or name under configs/)")
        sub.add_argument("--out", type=str, default=None,
                         help="Output directory (default: the configuration's, else ./output)")
        sub.add_argument("--check", action="store_true", help="Exit with status 1 when a threshold fails")
        sub.add_argument("--seed", type=int, default=None, help="Override the probe seed")
        sub.add_argument("--threads", type=int, default=None,
                         help=f"Worker threads (default: ${config.THREADS_ENV_VAR} or 1)")
        sub.add_argument("--debug", action="store_true", help="Enable debug logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function"""
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logging(debug=args.debug)
    logger = logging.getLogger(__name__)

    logger.info("=" * 60)
    logger.info(f"Periodic Homogenization Toolkit: {args.command}")
    logger.info("=" * 60)

    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg.seeds["probe"] = args.seed
        threads = resolve_threads(args.threads, cfg.threads)
        bundle = run_study(cfg, args.command, Path(args.out) if args.out else None, threads)
    except ConfigError as e:
        logging.getLogger("config_errors").error(f"Configuration error: {str(e)}", exc_info=True)
        print(str(e), file=sys.stderr)
        return config.EXIT_CODES["CONFIG_ERROR"]
    except HomogenizationError as e:
        logging.getLogger("solver_errors").error(f"Solver failure: {str(e)}", exc_info=True)
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return config.EXIT_CODES["SOLVER_FAILURE"]

    if args.command == "cell":
        print(f"g0 = {g0_text(bundle)}")

    logger.info("=" * 60)
    logger.info("STUDY COMPLETE")
    logger.info("=" * 60)
    logger.info(f"Problem: {bundle.problem_id} ({bundle.fingerprint})")
    logger.info(f"Status: {bundle.status}")
    failed = [o["name"] for o in bundle.outcomes if o["status"] == config.STUDY_STATUS["FAILED"]]
    for name in failed:
        logger.info(f"Failed: {name}")
    for kind, path in bundle.paths.items():
        logger.info(f"Wrote {kind}: {path}")
    logger.info("=" * 60)

    if (args.check or args.command == "check") and not bundle.passed:
        return config.EXIT_CODES["THRESHOLD_FAILURE"]
    return config.EXIT_CODES["PASS"]


if __name__ == "__main__":
    sys.exit(main())
