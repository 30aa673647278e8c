# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""
Numerical lab for degenerate fully nonlinear elliptic equations: solve model
problems, measure regularity exponents and free boundaries, and check them
against their predicted values
"""

import argparse
import logging
import sys

from . import __version__
from ._config import EXPERIMENTS, load_config
from ._errors import DegelError
from ._experiments import run_experiment
from ._logging import configure_logger

EXIT_FAILED_CHECK = 2

# Main parser with root-level flags
parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--version", action="version", version="%(prog)s " + __version__)

# Initiate first-level subcommands
subparsers = parser.add_subparsers(dest="command", help="Available commands", required=True)

# Common flags, usable for all effective subcommands
common_flags = argparse.ArgumentParser(add_help=False)  # No automatic help to avoid duplication
common_flags.add_argument("-v", "--verbose", action="store_true", help="Verbose output (DEBUG)")
common_flags.add_argument(
    "-q", "--quiet", action="store_true", help="Only log warnings and errors"
)
common_flags.add_argument(
    "-c",
    "--config",
    help="Path to the experiment configuration (key = value lines)",
    required=True,
)

# Run an experiment
parser_run = subparsers.add_parser(
    "run",
    help=f"Run the experiment of a configuration. Experiments: {', '.join(EXPERIMENTS)}",
    parents=[common_flags],
)
parser_run.add_argument(
    "-o",
    "--out",
    help="Directory for CSV artifacts. Overrides output.path of the configuration",
)
parser_run.add_argument(
    "--seed",
    help="Seed for randomized experiments. Overrides seed of the configuration",
    type=int,
)

# Validate a configuration without solving
parser_check = subparsers.add_parser(
    "check-config",
    help="Parse and validate a configuration, and print it with all defaults resolved",
    parents=[common_flags],
)


def main():
    """Main function"""

    args = parser.parse_args()

    # Set logger
    configure_logger(args=args)

    # Debug arguments
    logging.debug(args)

    try:
        cfg = load_config(args.config)

        if args.command == "check-config":
            print("\n".join(cfg.to_lines()))

        elif args.command == "run":
            result = run_experiment(cfg, out=args.out, seed=args.seed)
            print("\n".join(result.summary_lines()))
            if not result.passed:
                failed = [m.name for m in result.measurements if not m.passed]
                logging.error("Measured quantities outside their bands: %s", ", ".join(failed))
                sys.exit(EXIT_FAILED_CHECK)

    except DegelError as exc:
        logging.critical(exc)
        sys.exit(1)
    except OSError as exc:
        logging.critical("Cannot write results: %s", exc)
        sys.exit(1)


if __name__ == "__main__":
    main()
