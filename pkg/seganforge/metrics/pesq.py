"""Adapter around an external wide-band PESQ executable"""

import re
import shlex
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path

from seganforge.config import Settings
from seganforge.exceptions import PesqAdapterError
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_PATTERN = r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?"
PESQ_MIN = -0.5
PESQ_MAX = 4.5


@dataclass(frozen=True)
class PesqAdapter:
    """Command template with {clean} and {degraded} placeholders plus an output pattern"""

    command: str
    pattern: str = DEFAULT_PATTERN
    timeout_s: float = 300.0

    @classmethod
    def from_settings(cls, settings: Settings) -> "PesqAdapter | None":
        if not settings.PESQ_COMMAND:
            return None
        return cls(command=settings.PESQ_COMMAND, pattern=settings.PESQ_PATTERN or DEFAULT_PATTERN)

    @property
    def executable(self) -> str:
        return shlex.split(self.command)[0]

    def available(self) -> bool:
        return shutil.which(self.executable) is not None or Path(self.executable).is_file()

    def render(self, clean_path: str | Path, degraded_path: str | Path) -> list[str]:
        return [
            part.replace("{clean}", str(clean_path)).replace("{degraded}", str(degraded_path))
            for part in shlex.split(self.command)
        ]


def parse_pesq_output(output: str, pattern: str = DEFAULT_PATTERN) -> float:
    """
    Take the last match of ``pattern`` in the tool output as the MOS value.

    Raises:
        PesqAdapterError: No match, or value outside [-0.5, 4.5]
    """
    matches = list(re.finditer(pattern, output))
    if not matches:
        raise PesqAdapterError("PESQ output contains no score", output=output)
    match = matches[-1]
    text = match.group(1) if match.groups() else match.group(0)
    try:
        value = float(text)
    except ValueError as exc:
        raise PesqAdapterError(f"PESQ score {text!r} is not a number", output=output) from exc
    if not PESQ_MIN <= value <= PESQ_MAX:
        raise PesqAdapterError(f"PESQ score {value} outside [{PESQ_MIN}, {PESQ_MAX}]", output=output)
    return value


def pesq_external(
    clean_path: str | Path, degraded_path: str | Path, adapter: PesqAdapter | None
) -> float | None:
    """
    Score a degraded file against its clean reference with the configured tool.

    Returns:
        float | None: MOS value, or None when no adapter is configured or its executable is missing

    Raises:
        PesqAdapterError: Tool failed or its output could not be parsed
    """
    if adapter is None:
        return None
    if not adapter.available():
        logger.warning(f"PESQ adapter executable not found | executable={adapter.executable}")
        return None

    args = adapter.render(clean_path, degraded_path)
    try:
        completed = subprocess.run(
            args, capture_output=True, text=True, timeout=adapter.timeout_s, check=False
        )
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise PesqAdapterError(f"PESQ adapter failed to run | error={exc}") from exc

    output = completed.stdout + completed.stderr
    if completed.returncode != 0:
        raise PesqAdapterError(
            f"PESQ adapter exited with status {completed.returncode}", output=output
        )
    return parse_pesq_output(completed.stdout, adapter.pattern)
