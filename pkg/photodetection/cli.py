# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the command line interface of the photodetection experiments.

    python -m photodetection <command> [options]

Exit status: 0 on success, 1 when a validation criterion fails, 2 for usage, configuration or I/O errors
and 3 when a computation fails numerically.
"""

import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence

from photodetection import experiments
from photodetection.config import CONFIG_ATTRIBUTES, FORMAT_CHOICES, MODEL_CHOICES, ExperimentConfig
from photodetection.exceptions.errors import ConfigValueError, PhotodetectionError
from photodetection.fock import StateKind
from photodetection.output import write_table
from photodetection.trajectories import sample_records, write_raw_records
from photodetection.tools import FullLogger, log_exception

LOGGER = FullLogger(__name__)

EXIT_SUCCESS = 0
EXIT_VALIDATION_FAILURE = 1
EXIT_USAGE_ERROR = 2
EXIT_RUNTIME_ERROR = 3

DEFAULT_RAW_COUNT = 100

COMMAND_HELP = {
    "figure1": "mean photocount against lambda t for nbar 50 and 100",
    "figure2": "normalized second factorial moment K against lambda t",
    "figure3": "mean waiting time and N_CAV against lambda t for nbar 100",
    "trajectories": "Monte Carlo count moments next to the analytic values",
    "distribution": "count distribution P(m) at lambda t = tmax",
    "cavity": "SD zero-count probability with and without cavity damping",
    "validate": "run the validation suite and report pass or fail per criterion"
}


class UsageError(Exception):
    """Raised by the argument parser instead of exiting the interpreter."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _config_arguments() -> argparse.ArgumentParser:
    """Returns the parent parser holding the configuration flags. Every default is None so that an absent
       flag does not override the environment or the config file."""
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("configuration")
    group.add_argument("--config", type=str, default=None, help="JSON configuration file")
    group.add_argument("--model", choices=MODEL_CHOICES, default=None, help="photodetection model")
    group.add_argument("--state", choices=StateKind.KIND_TAGS, default=None, help="initial state kind")
    group.add_argument("--nbar", type=float, default=None, help="mean photon number of the initial state")
    group.add_argument("--eta", type=float, default=None, help="quantum efficiency")
    group.add_argument("--dark", type=float, default=None, help="dark count ratio d")
    group.add_argument("--cavity", type=float, default=None, help="cavity damping ratio c")
    group.add_argument("--tmin", type=float, default=None, help="first lambda t of the grid")
    group.add_argument("--tmax", type=float, default=None, help="last lambda t of the grid")
    group.add_argument("--points", type=int, default=None, help="number of grid points")
    group.add_argument("--nmax", type=int, default=None, help="Fock space truncation")
    group.add_argument("--mmax", type=int, default=None, help="largest count of the count distribution")
    group.add_argument("--traj", type=int, default=None, help="number of Monte Carlo trajectories")
    group.add_argument("--seed", type=int, default=None, help="master seed of the trajectories")
    group.add_argument("--out", type=str, default=None, help="output file, stdout when absent or '-'")
    group.add_argument("--format", choices=FORMAT_CHOICES, default=None, help="output format")
    group.add_argument("--workers", type=int, default=None, help="worker processes for the trajectories")
    group.add_argument("--block-size", dest="block_size", type=int, default=None,
                       help="trajectories per ensemble block")
    group.add_argument("--epsilon", type=float, default=None, help="truncation tail tolerance")
    return parser


def _criteria(text: str) -> List[int]:
    try:
        numbers = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as error:
        raise argparse.ArgumentTypeError("criteria must be comma separated integers") from error
    unknown = [number for number in numbers if number not in experiments.VALIDATION_CHECKS]
    if unknown or not numbers:
        raise argparse.ArgumentTypeError("unknown criteria: {:s}".format(text))
    return numbers


def build_parser() -> argparse.ArgumentParser:
    """Returns the argument parser with one subcommand per experiment."""
    parser = _ArgumentParser(prog="photodetection", description="Continuous photodetection model experiments.")
    subparsers = parser.add_subparsers(dest="command", metavar="command", parser_class=_ArgumentParser)
    subparsers.required = True
    parent = _config_arguments()
    for command, help_text in COMMAND_HELP.items():
        subparser = subparsers.add_parser(command, parents=[parent], help=help_text, description=help_text)
        if command == "trajectories":
            subparser.add_argument("--raw", type=str, default=None,
                                   help="also write raw trajectory events, tab separated, to this file")
            subparser.add_argument("--raw-count", dest="raw_count", type=int, default=DEFAULT_RAW_COUNT,
                                   help="number of raw trajectories per model")
        elif command == "validate":
            subparser.add_argument("--criteria", type=_criteria, default=None,
                                   help="comma separated criterion numbers, all by default")
    return parser


def config_from_arguments(arguments: argparse.Namespace) -> ExperimentConfig:
    """Returns the configuration composed from the environment, the optional config file and the flags."""
    overrides: Dict[str, Any] = {name: getattr(arguments, name, None) for name in CONFIG_ATTRIBUTES}
    return ExperimentConfig.resolve(arguments.config, overrides)


def _write_raw(config: ExperimentConfig, path: str, raw_count: int):
    if raw_count < 1:
        raise ConfigValueError("--raw-count must be at least 1, got {:d}".format(raw_count))
    with open(path, mode="w", encoding="utf-8", newline="") as raw_file:
        for model in config.models():
            records = sample_records(
                config.initial_state(), config.params(), model, config.tmax, raw_count, config.seed)
            raw_file.write("# {:s}\n".format(model))
            write_raw_records(records, raw_file)
    LOGGER.info("Wrote {:d} raw trajectories per model to {:s}".format(raw_count, path))


def run_command(arguments: argparse.Namespace) -> int:
    """Runs the parsed command and returns the exit status."""
    config = config_from_arguments(arguments)
    LOGGER.info("Running '{:s}' with {:s}".format(arguments.command, str(config)))

    if arguments.command == "validate":
        table, passed = experiments.validate(config, arguments.criteria)
        write_table(table, config.out, config.format)
        return EXIT_SUCCESS if passed else EXIT_VALIDATION_FAILURE

    table = experiments.COMMANDS[arguments.command](config)
    write_table(table, config.out, config.format)
    if arguments.command == "trajectories" and arguments.raw is not None:
        _write_raw(config, arguments.raw, arguments.raw_count)
    return EXIT_SUCCESS


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parses the arguments, runs the command and returns the exit status."""
    parser = build_parser()
    try:
        arguments = parser.parse_args(argv)
    except UsageError as error:
        LOGGER.error("Usage error: {:s}".format(str(error)))
        return EXIT_USAGE_ERROR

    try:
        return run_command(arguments)
    except ConfigValueError as error:
        LOGGER.error("Configuration error: {:s}".format(error.message))
        return EXIT_USAGE_ERROR
    except OSError as error:
        LOGGER.error("I/O error on {:s}: {:s}".format(str(error.filename), str(error.strerror)))
        return EXIT_USAGE_ERROR
    except PhotodetectionError as error:
        log_exception(error, LOGGER.error, "Command '{:s}' failed:".format(arguments.command))
        return EXIT_RUNTIME_ERROR
