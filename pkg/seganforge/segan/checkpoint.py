"""Binary checkpoint container

Layout (little-endian)::

    b"SGCK" | u32 version | u32 n | n bytes of JSON config | records...

Each record is ``u32 name_len | name | u8 dtype tag | u32 rank | u32 dims[rank] | float32 payload``.
Parameter records use their plain names (``g.*`` / ``d.*``); optimizer accumulators are stored
under ``opt.<parameter name>``.
"""

import hashlib
import json
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from seganforge.exceptions import CheckpointFormatError
from seganforge.models.schemas import DiscriminatorConfig, GeneratorConfig, Provenance
from seganforge.segan.networks import discriminator_parameter_shapes, generator_parameter_shapes
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

MAGIC = b"SGCK"
FORMAT_VERSION = 1
DTYPE_FLOAT32 = 1
OPTIMIZER_PREFIX = "opt."


@dataclass
class ModelCheckpoint:
    """Generator and discriminator parameters with their configs and training provenance"""

    generator_config: GeneratorConfig
    discriminator_config: DiscriminatorConfig
    generator_params: dict[str, np.ndarray]
    discriminator_params: dict[str, np.ndarray]
    provenance: Provenance
    optimizer_state: dict[str, np.ndarray] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def expected_shapes(self) -> dict[str, tuple[int, ...]]:
        return {
            **generator_parameter_shapes(self.generator_config),
            **discriminator_parameter_shapes(self.discriminator_config),
        }

    @property
    def parameters(self) -> dict[str, np.ndarray]:
        return {**self.generator_params, **self.discriminator_params}


def fingerprint_checkpoint(ckpt: ModelCheckpoint) -> str:
    """SHA-256 over parameter names and float32 bytes, in sorted name order"""
    digest = hashlib.sha256()
    for name, value in sorted(ckpt.parameters.items()):
        digest.update(name.encode("utf-8"))
        digest.update(np.ascontiguousarray(value, dtype="<f4").tobytes())
    return digest.hexdigest()


def _config_block(ckpt: ModelCheckpoint) -> bytes:
    block = {
        "generator": ckpt.generator_config.model_dump(mode="json"),
        "discriminator": ckpt.discriminator_config.model_dump(mode="json"),
        "provenance": ckpt.provenance.model_dump(mode="json"),
    }
    return json.dumps(block, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _record(name: str, value: np.ndarray) -> bytes:
    array = np.ascontiguousarray(value, dtype="<f4")
    encoded = name.encode("utf-8")
    header = struct.pack(f"<I{len(encoded)}sBI", len(encoded), encoded, DTYPE_FLOAT32, array.ndim)
    dims = struct.pack(f"<{array.ndim}I", *array.shape)
    return header + dims + array.tobytes()


def serialize_checkpoint(ckpt: ModelCheckpoint) -> bytes:
    config = _config_block(ckpt)
    parts = [MAGIC, struct.pack("<II", ckpt.format_version, len(config)), config]
    for name, value in ckpt.parameters.items():
        parts.append(_record(name, value))
    for name, value in ckpt.optimizer_state.items():
        parts.append(_record(OPTIMIZER_PREFIX + name, value))
    return b"".join(parts)


def save_checkpoint(ckpt: ModelCheckpoint, path: str | Path) -> Path:
    """
    Write ``ckpt`` atomically: a temporary file in the target directory is renamed into place.

    Returns:
        Path: The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = serialize_checkpoint(ckpt)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    logger.debug(f"Checkpoint saved | path={path} | bytes={len(payload)}")
    return path


class _Reader:
    def __init__(self, data: bytes, source: str):
        self.data = data
        self.pos = 0
        self.source = source

    @property
    def exhausted(self) -> bool:
        return self.pos >= len(self.data)

    def take(self, count: int, what: str) -> bytes:
        if self.pos + count > len(self.data):
            raise CheckpointFormatError(
                f"Checkpoint truncated while reading {what} | path={self.source} | offset={self.pos}"
            )
        chunk = self.data[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]


def deserialize_checkpoint(data: bytes, source: str = "<bytes>") -> ModelCheckpoint:
    """
    Parse and validate a checkpoint byte string.

    Raises:
        CheckpointFormatError: Bad magic, unsupported version, truncation, duplicate, missing,
            unknown or wrongly shaped records
    """
    reader = _Reader(data, source)
    if reader.take(4, "magic") != MAGIC:
        raise CheckpointFormatError(f"Not a checkpoint file (bad magic) | path={source}")
    version = reader.u32("version")
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(
            f"Unsupported checkpoint version {version} (this build reads {FORMAT_VERSION}) | path={source}"
        )
    config_len = reader.u32("config length")
    try:
        block = json.loads(reader.take(config_len, "config block").decode("utf-8"))
        generator_config = GeneratorConfig.model_validate(block["generator"])
        discriminator_config = DiscriminatorConfig.model_validate(block["discriminator"])
        provenance = Provenance.model_validate(block["provenance"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValidationError) as exc:
        raise CheckpointFormatError(f"Invalid checkpoint config block | path={source} | error={exc}") from exc

    expected = {
        **generator_parameter_shapes(generator_config),
        **discriminator_parameter_shapes(discriminator_config),
    }
    records: dict[str, np.ndarray] = {}
    while not reader.exhausted:
        name_len = reader.u32("record name length")
        name = reader.take(name_len, "record name").decode("utf-8", errors="replace")
        dtype_tag = reader.take(1, "dtype tag")[0]
        if dtype_tag != DTYPE_FLOAT32:
            raise CheckpointFormatError(f"Unknown dtype tag {dtype_tag} | record={name}")
        rank = reader.u32("rank")
        dims = tuple(struct.unpack(f"<{rank}I", reader.take(4 * rank, "dims")))
        count = int(np.prod(dims, dtype=np.int64)) if rank else 1
        payload = reader.take(4 * count, f"payload of {name}")
        if name in records:
            raise CheckpointFormatError(f"Duplicate checkpoint record | record={name}")
        records[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float32)

    optimizer_state: dict[str, np.ndarray] = {}
    params: dict[str, np.ndarray] = {}
    for name, value in records.items():
        target = name[len(OPTIMIZER_PREFIX) :] if name.startswith(OPTIMIZER_PREFIX) else name
        if target not in expected:
            raise CheckpointFormatError(f"Unexpected checkpoint record | record={name}")
        if value.shape != tuple(expected[target]):
            raise CheckpointFormatError(
                f"Record shape inconsistent with config | record={name} | "
                f"expected={tuple(expected[target])} | got={value.shape}"
            )
        if name.startswith(OPTIMIZER_PREFIX):
            optimizer_state[target] = value
        else:
            params[name] = value
    missing = [name for name in expected if name not in params]
    if missing:
        raise CheckpointFormatError(f"Checkpoint missing parameters | names={missing[:5]}")

    return ModelCheckpoint(
        generator_config=generator_config,
        discriminator_config=discriminator_config,
        generator_params={name: params[name] for name in generator_parameter_shapes(generator_config)},
        discriminator_params={
            name: params[name] for name in discriminator_parameter_shapes(discriminator_config)
        },
        provenance=provenance,
        optimizer_state=optimizer_state,
        format_version=version,
    )


def load_checkpoint(path: str | Path) -> ModelCheckpoint:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CheckpointFormatError(f"Cannot read checkpoint | path={path} | error={exc}") from exc
    ckpt = deserialize_checkpoint(data, str(path))
    logger.debug(f"Checkpoint loaded | path={path} | epochs={ckpt.provenance.epochs_completed}")
    return ckpt
