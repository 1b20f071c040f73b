"""TOML command configuration: loading, ``--set`` overrides, validation and provenance files"""

import hashlib
import json
import sys
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib

from seganforge import __version__
from seganforge.exceptions import ConfigError
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

EFFECTIVE_CONFIG = "effective_config.json"
PROVENANCE = "provenance.json"


def load_toml(path: str | Path | None) -> dict[str, Any]:
    """
    Read a TOML config file; ``None`` yields an empty document.

    Raises:
        ConfigError: File missing or not valid TOML (message carries the parser's line/column)
    """
    if path is None:
        return {}
    path = Path(path)
    try:
        with path.open("rb") as handle:
            return tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"Config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"Invalid TOML in {path}: {exc}") from exc


def parse_override(text: str) -> tuple[list[str], Any]:
    """
    Split ``section.key=value`` into a key path and a value.

    The value is read as a TOML scalar or array (``3``, ``0.5``, ``true``, ``[1, 2]``,
    ``"text"``); anything that does not parse as TOML is kept as a bare string.

    Raises:
        ConfigError: Missing ``=`` or empty key
    """
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key or any(not part for part in key.split(".")):
        raise ConfigError(f"Override must look like section.key=value, got {text!r}")
    raw = raw.strip()
    try:
        value = tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key.split("."), value


def apply_overrides(document: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Return a copy of ``document`` with every ``--set`` override applied in order"""
    merged = json.loads(json.dumps(document))
    for text in overrides:
        keys, value = parse_override(text)
        node = merged
        for key in keys[:-1]:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise ConfigError(f"Override {text!r} descends into non-table key {key!r}")
            node = child
        node[keys[-1]] = value
        logger.debug(f"Config override applied | key={'.'.join(keys)} | value={value!r}")
    return merged


def _dotted(location: tuple[Any, ...]) -> str:
    return ".".join(str(part) for part in location) or "<root>"


def validate_document(model: type[ModelT], document: dict[str, Any]) -> ModelT:
    """
    Validate a merged config document against a command model.

    Raises:
        ConfigError: First validation error, reported with its dotted key
    """
    try:
        return model.model_validate(document)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(
            f"Invalid config value at {_dotted(first['loc'])}: {first['msg']}"
            + (f" ({len(exc.errors())} errors)" if len(exc.errors()) > 1 else "")
        ) from exc


def config_hash(config: BaseModel) -> str:
    """SHA-256 of the canonical JSON form of a validated config"""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_effective_config(config: BaseModel, out_dir: str | Path) -> Path:
    path = Path(out_dir) / EFFECTIVE_CONFIG
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return path


def write_provenance(
    config: BaseModel, out_dir: str | Path, command: str, seeds: dict[str, int] | None = None
) -> Path:
    """
    Write ``provenance.json`` next to a command's outputs.

    Holds the tool version, subcommand, config hash and seeds. No timestamps, so reruns with the
    same inputs produce the same bytes.
    """
    path = Path(out_dir) / PROVENANCE
    path.parent.mkdir(parents=True, exist_ok=True)
    record = {
        "tool_version": __version__,
        "command": command,
        "config_sha256": config_hash(config),
        "seeds": dict(sorted((seeds or {}).items())),
    }
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def describe_model(model: type[BaseModel], prefix: str = "") -> list[str]:
    """``dotted.key  type  (default ...)`` lines for every field of a command model, nested"""
    lines: list[str] = []
    for name, field in model.model_fields.items():
        key = f"{prefix}{name}"
        annotation = field.annotation
        if isinstance(annotation, type) and issubclass(annotation, BaseModel):
            lines.extend(describe_model(annotation, f"{key}."))
            continue
        type_name = getattr(annotation, "__name__", None) or str(annotation).replace("typing.", "")
        if field.is_required():
            default = "required"
        elif field.default_factory is not None:
            default = f"default {field.default_factory()!r}"
        else:
            default = f"default {field.default!r}"
        lines.append(f"  {key:<32} {type_name:<16} {default}")
    return lines
