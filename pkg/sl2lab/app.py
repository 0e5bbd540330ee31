import argparse
import logging
import sys
from typing import Callable, Optional, Sequence, TextIO

import structlog

from .constants import (
    CommandConfigError,
    ContextMismatchError,
    DomainError,
    ImplementationBugError,
    OutputFormat,
)
from .output import RecordWriter
from .router import Router
from .settings import get_settings

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def configure_logging(level: Optional[str] = None, stream: Optional[TextIO] = None) -> None:
    """Key-value logs on stderr, without timestamps."""
    level_name = (level or get_settings().log_level).upper()
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.KeyValueRenderer(
                key_order=["level", "event"], sort_keys=True
            ),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level_name)
        ),
        logger_factory=structlog.PrintLoggerFactory(stream or sys.stderr),
        cache_logger_on_first_use=False,
    )


class Lab:
    """Root application: a router of commands behind one argparse front-end."""

    def __init__(
        self,
        title: str = "",
        description: str = "",
        version: str = "0.1.0",
        prog: str = "sl2lab",
    ):
        self.router = Router()
        self.title = title
        self.description = description
        self.version = version
        self.prog = prog

    def command(self, name: Optional[str] = None, **kwargs: str) -> Callable:
        return self.router.command(name, **kwargs)

    def add_router(self, router: Router, prefix: str = "") -> None:
        self.router.add_router(router, prefix)

    def get_parser(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument(
            "--format",
            choices=[f.value for f in OutputFormat],
            default=OutputFormat.JSON.value,
            help="Output format.",
        )
        common.add_argument("--out", metavar="FILE", help="Write records to FILE instead of stdout.")
        parser = argparse.ArgumentParser(
            prog=self.prog, description=self.description or self.title
        )
        parser.add_argument("--version", action="version", version=f"%(prog)s {self.version}")
        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
        subparsers.required = True
        for command in self.router.commands:
            command.add_parser(subparsers, parents=[common])
        return parser

    def run(self, argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
        """Parse ``argv``, run the command and write its records; returns the exit code."""
        parser = self.get_parser()
        try:
            namespace = parser.parse_args(argv)
        except SystemExit as exit_:
            return int(exit_.code or 0)

        output_format = OutputFormat(namespace.format)
        command = self.router.get(namespace.command)
        try:
            config, records = command.run(namespace, output_format)
        except CommandConfigError as error:
            parser.print_usage(sys.stderr)
            print(f"{self.prog} {command.name}: error: {error}", file=sys.stderr)
            return EXIT_USAGE
        except (ImplementationBugError, DomainError, ContextMismatchError) as error:
            logger.error(
                "command_failed",
                command=command.name,
                error=type(error).__name__,
                message=str(error),
                **error.diagnostics,
            )
            return EXIT_FAILURE

        if namespace.out:
            with open(namespace.out, "w", encoding="utf-8", newline="") as stream:
                RecordWriter(stream, output_format).write_all(config, list(records))
        else:
            RecordWriter(stdout or sys.stdout, output_format).write_all(config, list(records))
        return EXIT_OK


def create_lab() -> Lab:
    # pylint: disable=import-outside-toplevel
    from .commands import router

    lab = Lab(
        title="sl2lab",
        description="Exact experiments on growth, diameter and mixing in SL_2(F_p).",
    )
    lab.add_router(router)
    return lab


def main(argv: Optional[Sequence[str]] = None) -> None:
    configure_logging()
    sys.exit(create_lab().run(argv))
