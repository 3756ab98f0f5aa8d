"""Experiment subcommands of the command-line runner."""
import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from config import Config
from exceptions import ConfigError, DomainError, NumericError, VerificationFailure
from handlers.experiment_handler import ExperimentHandler
from models.chain_models import SEED_MAX
from models.experiment_models import CheckName

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_VERIFICATION = 3

EXPERIMENT_KINDS = {
    "scale-info": "Local Taylor data, r_n, K and T at the observation point",
    "sample": "Metropolis samples of the Gibbs measure",
    "fekete": "Minimum-energy configuration (beta = infinity proxy)",
    "verify": "Numerical checks of the exact identities and constants",
    "spacing-experiment": "Spacing statistics against the separation bound",
    "beta-sweep": "Spacing experiment over a beta ladder with trend summary",
}


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed <= SEED_MAX:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return seed


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _fail(code: int, message: str, where: str) -> int:
    print(json.dumps({"error": message, "where": where}), file=sys.stderr)
    return code


def run_experiment(args: argparse.Namespace) -> int:
    """
    Load the config, run the experiment and map failures to exit codes.

    Returns:
        0 on success, 1 on config errors, 2 on numeric failures, 3 on failed checks
    """
    try:
        config = ExperimentHandler.load_config(Path(args.config), args.kind, args.seed, args.threads)
        if getattr(args, "check", None):
            config = config.model_validate({**config.model_dump(), "checks": args.check})
        Config.validate_output_dir(args.out)
    except (OSError, json.JSONDecodeError, ValidationError, ConfigError, ValueError) as e:
        logger.error(f"[Experiment] Invalid configuration: {e}")
        return _fail(EXIT_CONFIG, str(e).splitlines()[0], "config")

    try:
        ExperimentHandler(config, Config.get_output_dir(args.out)).run()
    except ConfigError as e:
        return _fail(EXIT_CONFIG, str(e), "config")
    except VerificationFailure as e:
        logger.warning(f"[Experiment] {e}")
        return _fail(EXIT_VERIFICATION, str(e), "verify")
    except (NumericError, DomainError, ValueError, ArithmeticError) as e:
        logger.error(f"[Experiment] {args.kind} failed: {e}")
        return _fail(EXIT_NUMERIC, str(e), args.kind)
    return EXIT_OK


def register_experiment_commands(subparsers):
    """Register one subcommand per experiment kind."""
    for kind, description in EXPERIMENT_KINDS.items():
        parser = subparsers.add_parser(kind, help=description, description=description)
        parser.add_argument("--config", required=True, help="Path to the JSON experiment config")
        parser.add_argument("--seed", type=_seed, default=None, help="Base seed, overrides the config")
        parser.add_argument("--threads", type=_positive, default=None, help="Worker threads (default: all cores)")
        parser.add_argument("--out", default=None, help=f"Output directory (default: {Config.OUTPUT_DIR})")
        if kind == "verify":
            parser.add_argument(
                "--check",
                action="append",
                choices=list(CheckName.__args__),
                help="Check to run; repeat for several (default: config checks)",
            )
        parser.set_defaults(handler=run_experiment, kind=kind)
