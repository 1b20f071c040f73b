"""Command-line surface: argument parsing and subcommand handlers"""

from seganforge.cli.commands import CommandHandler
from seganforge.cli.parser import COMMAND_MODELS, create_parser

__all__ = ["COMMAND_MODELS", "CommandHandler", "create_parser"]
