"""
CLI Routes - aggregates the sub-command modules and maps errors to exit codes
"""
import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.cli import experiment_commands, gmm_commands, validation_message
from app.core.config import settings
from app.core.exceptions import (
    EXIT_CONFIG_ERROR,
    EXIT_DATA_ERROR,
    EXIT_UNEXPECTED,
    CiidError,
    ConfigError,
    InvalidParameters,
)
from app.core.logging_config import logger

EXIT_CODES_HELP = (
    "exit codes: 0 success, 1 unexpected error, 2 usage or config error, "
    "3 data error, 4 verification failed"
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description=(
            "Conditional-i.i.d. modelling lab: estimator verification and grouped experiments."
        ),
        epilog=EXIT_CODES_HELP,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    gmm_commands.register(subparsers)
    experiment_commands.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        return args.handler(args)
    except InvalidParameters as exc:
        logger.error(f"Invalid parameters : command={args.command} , error={exc}")
        sys.stderr.write(args.usage)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ConfigError as exc:
        logger.error(f"Configuration error : command={args.command} , error={exc}")
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except CiidError as exc:
        logger.error(f"Data error : command={args.command} , error={exc}")
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        logger.error(f"Invalid parameters : command={args.command} , error={exc}")
        sys.stderr.write(args.usage)
        print(f"error: {validation_message(exc)}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (FileNotFoundError, PermissionError) as exc:
        logger.error(f"Input not readable : command={args.command} , error={exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except Exception as exc:
        logger.error(f"Unhandled exception : command={args.command} , error={exc}", exc_info=True)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
