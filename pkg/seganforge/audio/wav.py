"""RIFF/WAVE reading and writing"""

from pathlib import Path

import numpy as np
import soundfile as sf

from seganforge.audio.clip import AudioClip
from seganforge.exceptions import AudioFormatError, EmptyClipError, SampleRateError
from seganforge.models.schemas import CANONICAL_SAMPLE_RATE_HZ
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

PCM16_SCALE = 32768.0
SUPPORTED_SUBTYPES = ("PCM_16", "FLOAT", "DOUBLE")


def load_wav(
    path: str | Path,
    *,
    utterance_id: str | None = None,
    speaker_id: str = "",
    language: str = "",
) -> AudioClip:
    """
    Read a 16 kHz WAV file into a mono clip scaled to [-1, 1].

    Args:
        path: WAV file path
        utterance_id: Identifier for the clip (defaults to the file stem)
        speaker_id: Speaker tag
        language: Language tag

    Returns:
        AudioClip: Channel 0 of the file

    Raises:
        AudioFormatError: Malformed header or unsupported codec
        SampleRateError: Sample rate other than 16 kHz
        EmptyClipError: No sample frames in the data chunk
    """
    path = Path(path)
    try:
        info = sf.info(str(path))
    except RuntimeError as exc:
        raise AudioFormatError(f"Cannot parse WAV header | path={path} | error={exc}") from exc

    if info.format not in ("WAV", "WAVEX"):
        raise AudioFormatError(f"Not a RIFF/WAVE file | path={path} | format={info.format}")
    if info.subtype not in SUPPORTED_SUBTYPES:
        raise AudioFormatError(f"Unsupported codec | path={path} | subtype={info.subtype}")
    if info.samplerate != CANONICAL_SAMPLE_RATE_HZ:
        raise SampleRateError(info.samplerate, CANONICAL_SAMPLE_RATE_HZ)
    if info.frames == 0:
        raise EmptyClipError(f"WAV file has no samples | path={path}")

    if info.subtype == "PCM_16":
        data, _ = sf.read(str(path), dtype="int16", always_2d=True)
        samples = data[:, 0].astype(np.float64) / PCM16_SCALE
    else:
        data, _ = sf.read(str(path), dtype="float64", always_2d=True)
        samples = data[:, 0]

    if data.shape[1] > 1:
        logger.warning(f"Multichannel WAV, keeping channel 0 | path={path} | channels={data.shape[1]}")

    return AudioClip(
        samples=samples,
        sample_rate_hz=info.samplerate,
        utterance_id=utterance_id if utterance_id is not None else path.stem,
        speaker_id=speaker_id,
        language=language,
    )


def quantize_pcm16(samples: np.ndarray) -> np.ndarray:
    """Map [-1, 1] floats to int16 codes, saturating instead of wrapping"""
    codes = np.round(np.asarray(samples, dtype=np.float64) * PCM16_SCALE)
    return np.clip(codes, -PCM16_SCALE, PCM16_SCALE - 1).astype(np.int16)


def write_wav(clip: AudioClip, path: str | Path) -> None:
    """
    Write a clip as 16-bit PCM mono WAV.

    Raises:
        EmptyClipError: Clip has no samples
        OSError: File could not be written
    """
    if len(clip) == 0:
        raise EmptyClipError(f"Cannot write empty clip | utterance_id={clip.utterance_id}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sf.write(str(path), quantize_pcm16(clip.samples), clip.sample_rate_hz, subtype="PCM_16", format="WAV")
    logger.debug(f"WAV written | path={path} | samples={len(clip)}")
