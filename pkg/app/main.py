"""
Command-line runner for 2D Coulomb plasma simulations and verification experiments.

"""
import argparse
import logging
import sys

from config import Config
from commands import register_experiment_commands


# Configure logging
logging.basicConfig(
    level=Config.LOG_LEVEL,
    format='[%(asctime)s] %(levelname)s - %(name)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

# Silence noisy third-party loggers
logging.getLogger("numba").setLevel(logging.WARNING)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coulomb-plasma",
        description="Sample, minimize and verify two-dimensional Coulomb plasmas in radial potentials",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {Config.VERSION}")
    subparsers = parser.add_subparsers(dest="kind", required=True, metavar="<experiment>")
    register_experiment_commands(subparsers)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        Config.validate_constants()
    except ValueError as e:
        logger.error(f"[Config] {e}")
        return 1
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
