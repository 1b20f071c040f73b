"""Argument parser for the ``seganforge`` command"""

import argparse
import json
import sys
from typing import NoReturn

from pydantic import BaseModel

from seganforge import __version__
from seganforge.models.schemas import (
    EnhanceCommandConfig,
    EvaluateCommandConfig,
    Exp1CommandConfig,
    Exp2CommandConfig,
    MixCommandConfig,
    ReportCommandConfig,
    SynthCommandConfig,
    TrainCommandConfig,
)
from seganforge.utils.config_files import describe_model

COMMAND_MODELS: dict[str, type[BaseModel]] = {
    "synth": SynthCommandConfig,
    "mix": MixCommandConfig,
    "train": TrainCommandConfig,
    "finetune": TrainCommandConfig,
    "enhance": EnhanceCommandConfig,
    "evaluate": EvaluateCommandConfig,
    "exp1": Exp1CommandConfig,
    "exp2": Exp2CommandConfig,
    "report": ReportCommandConfig,
}

COMMAND_HELP = {
    "synth": "generate the synthetic desk corpus (clean tone complexes and noise WAVs)",
    "mix": "mix clean utterances with noise into train/test grids and write manifests",
    "train": "train a SEGAN model from scratch on a manifest",
    "finetune": "fine-tune a base checkpoint on a manifest",
    "enhance": "denoise a WAV file or every WAV in a directory",
    "evaluate": "score noisy or enhanced audio against clean references",
    "exp1": "training-duration sweep (pre-trained vs from scratch)",
    "exp2": "training-noise-type-count sweep at fixed duration",
    "report": "redraw tables and charts from an experiment directory",
}

PRESET_NOTE = "  plan.preset                      str              'full' or 'desk' (fills unset plan keys)"

USAGE_EXIT = 2


def error_line(code: str, message: str) -> None:
    """Single machine-readable failure line on stderr"""
    print(json.dumps({"error": {"code": code, "message": message}}), file=sys.stderr)


class ToolkitArgumentParser(argparse.ArgumentParser):
    """Usage errors end with the same JSON error line as every other failure"""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        error_line("usage_error", f"{self.prog}: {message}")
        self.exit(USAGE_EXIT)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _epilog(command: str) -> str:
    lines = ["config keys (TOML tables, or --set table.key=value):"]
    lines.extend(describe_model(COMMAND_MODELS[command]))
    if command in ("exp1", "exp2"):
        lines.append(PRESET_NOTE)
    if command == "finetune":
        lines.append("  train.init_mode is forced to 'preeng'; train.base_checkpoint is required")
    return "\n".join(lines)


def create_parser() -> argparse.ArgumentParser:
    """Build the top-level parser with one sub-parser per pipeline stage"""
    parser = ToolkitArgumentParser(
        prog="seganforge",
        description="SEGAN speech enhancement: corpora, training, evaluation and experiments",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log at DEBUG level (overrides --log-level)"
    )
    parser.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="console log level (default: LOG_LEVEL env or INFO)",
    )

    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command, help_text in COMMAND_HELP.items():
        sub = subparsers.add_parser(
            command,
            help=help_text,
            description=help_text,
            epilog=_epilog(command),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        sub.add_argument("--config", default=None, help="TOML config file")
        sub.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (repeatable; wins over the file)",
        )
        sub.add_argument("--out", required=True, help="output directory")
        if command in ("exp1", "exp2"):
            sub.add_argument(
                "--dry-run", action="store_true", help="enumerate runs into planned_runs.csv only"
            )
            sub.add_argument(
                "--jobs",
                type=_positive_int,
                default=None,
                help="parallel runs (default: SEGANFORGE_JOBS or 1)",
            )
            sub.add_argument("--preset", choices=["full", "desk"], default=None, help="plan preset")
    return parser
