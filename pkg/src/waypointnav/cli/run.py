import argparse
import sys
import time
import warnings
from typing import Final, NoReturn, Optional

from waypointnav.cli.config import get_modules_to_run, read_config, write_config
from waypointnav.cli.module_setup import MODULE_MAP, add_subparser
from waypointnav.common.exceptions import (
    DigestMismatchError,
    GenerationError,
    NumericAbort,
    NumericError,
    ParseError,
    SamplingError,
)
from waypointnav.common.strings import format_timedelta

EXIT_SUCCESS: Final = 0
EXIT_USAGE: Final = 1
EXIT_DATA: Final = 2
EXIT_NUMERIC: Final = 3

# checked in order, so the specific `ValueError` subclasses come before the catch-all
EXIT_CODES: Final = (
    ((NumericAbort, NumericError), EXIT_NUMERIC),
    (
        (DigestMismatchError, ParseError, FileNotFoundError, FileExistsError, SamplingError, GenerationError),
        EXIT_DATA,
    ),
    ((ValueError,), EXIT_USAGE),
)


class ArgumentParser(argparse.ArgumentParser):
    """An `argparse.ArgumentParser` that exits with the usage error code 1 rather than argparse's 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def exit_code(error: BaseException) -> Optional[int]:
    """The exit code for an error raised by a module run, or `None` if it is unexpected."""
    for types, code in EXIT_CODES:
        if isinstance(error, types):
            return code
    return None


def run(sysargv: list[str]) -> int:
    print("\nStarting up the waypointnav CLI!\n")
    start_time = time.time()

    parser = ArgumentParser(
        prog="waypointnav",
        description="CLI for generating worlds, training waypoint policies and evaluating them in robot time.",
    )

    # one subparser per module, plus one for a config file run and one for a full pipeline run
    subparsers = parser.add_subparsers()
    all_subparsers = {
        name: add_subparser(subparsers, name, option_config) for name, option_config in MODULE_MAP.items()
    }

    args = parser.parse_args(sysargv)

    executor = vars(args).get("func", None)
    try:
        if executor:
            if hasattr(args, "seed") and args.seed is None:
                warnings.warn("No seed has been specified, meaning the results of this run may not be reproducible.")
            args.modules_to_run = get_modules_to_run(executor)
            args.module_handover = {}
            args = executor(args)
        elif hasattr(args, "input_config"):
            args = read_config(args, parser, all_subparsers)
        else:
            parser.print_help()
            return EXIT_SUCCESS

        if args.save_config:
            write_config(args, all_subparsers)
    except Exception as error:
        code = exit_code(error)
        if code is None:
            raise
        print("\033[0m", end="")
        print(f"waypointnav: error: {error}", file=sys.stderr)
        if isinstance(error, NumericAbort) and error.diagnostic:
            print(f"waypointnav: diagnostic: {error.diagnostic}", file=sys.stderr)
        return code

    print(f"Finished! (Total run time: {format_timedelta(start_time, time.time())})")
    return EXIT_SUCCESS
