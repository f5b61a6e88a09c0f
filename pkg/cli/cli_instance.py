"""
Command-line parser creation and configuration
==============================================

Creates the ``qsmiles`` argument parser with every subcommand registered.
"""

import argparse
import sys

from config import LOG_LEVEL

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_INTERNAL_ERROR = 2


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the user-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER_ERROR, f"{self.prog}: error: {message}\n")


def create_parser() -> CliArgumentParser:
    """
    Create and configure the command-line parser.

    Returns:
        CliArgumentParser: Parser with all subcommands
    """
    from cli.commands import (circuit_commands, eval_commands, plot_commands, prepare_commands,
                              train_commands)

    parser = CliArgumentParser(
        prog="qsmiles",
        description="Hybrid quantum-classical SMILES autoencoder",
    )
    parser.add_argument("--log-level", default=LOG_LEVEL,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        type=str.upper, help="Log level for stderr and the log file")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    prepare_commands.setup(subparsers)
    train_commands.setup(subparsers)
    eval_commands.setup(subparsers)
    circuit_commands.setup(subparsers)
    plot_commands.setup(subparsers)
    return parser
