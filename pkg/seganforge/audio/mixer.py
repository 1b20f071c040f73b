"""Deterministic SNR-controlled mixing of clean speech with noise"""

from dataclasses import dataclass

import numpy as np

from seganforge.audio.clip import AudioClip
from seganforge.exceptions import DegenerateSignalError, EmptyClipError
from seganforge.models.schemas import NoiseCondition
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class MixResult:
    """Mixture plus the intermediate quantities needed to audit it"""

    clip: AudioClip
    preclip: np.ndarray
    noise_component: np.ndarray
    alpha: float
    offset: int


def mean_power(samples: np.ndarray) -> float:
    """Full-utterance mean squared amplitude"""
    return float(np.mean(np.square(samples))) if samples.size else 0.0


def measure_snr(clean: np.ndarray, noise_component: np.ndarray) -> float:
    """SNR in dB under the full-utterance mean-square power definition"""
    p_noise = mean_power(noise_component)
    if p_noise == 0.0:
        raise DegenerateSignalError("Noise component has zero power")
    return 10.0 * np.log10(mean_power(clean) / p_noise)


def select_noise_segment(noise: np.ndarray, length: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """
    Pick ``length`` samples of noise starting at a random offset.

    Noise at least as long as the target is sliced without wrapping; shorter noise is looped
    from the offset.
    """
    if noise.shape[0] >= length:
        offset = int(rng.integers(0, noise.shape[0] - length + 1))
        return noise[offset : offset + length], offset
    offset = int(rng.integers(0, noise.shape[0]))
    indices = (offset + np.arange(length)) % noise.shape[0]
    return noise[indices], offset


def mix_components(clean: AudioClip, noise: AudioClip, snr_db: float, rng_seed: int) -> MixResult:
    """
    Mix ``noise`` into ``clean`` at ``snr_db`` and keep the intermediate signals.

    Raises:
        SampleRateError: Either input is not 16 kHz
        EmptyClipError: Either input has no samples
        DegenerateSignalError: Silent clean or silent noise segment
    """
    clean.require_rate()
    noise.require_rate()
    if len(clean) == 0 or len(noise) == 0:
        raise EmptyClipError("Cannot mix empty clips")

    p_clean = mean_power(clean.samples)
    if p_clean == 0.0:
        raise DegenerateSignalError(f"Clean clip is silent | utterance_id={clean.utterance_id}")

    rng = np.random.default_rng(rng_seed)
    segment, offset = select_noise_segment(noise.samples, len(clean), rng)
    p_noise = mean_power(segment)
    if p_noise == 0.0:
        raise DegenerateSignalError(f"Noise segment is silent | noise={noise.utterance_id}")

    alpha = float(np.sqrt(p_clean / (p_noise * 10.0 ** (snr_db / 10.0))))
    noise_component = alpha * segment
    preclip = clean.samples + noise_component
    clip_count = int(np.count_nonzero(np.abs(preclip) > 1.0))
    if clip_count:
        logger.debug(
            f"Mixture clipped | utterance_id={clean.utterance_id} | clipped_samples={clip_count}"
        )

    noise_type = noise.condition.noise_type if noise.condition else noise.utterance_id
    mixed = clean.with_samples(
        np.clip(preclip, -1.0, 1.0),
        condition=NoiseCondition(noise_type=noise_type, snr_db=float(snr_db)),
        clip_count=clip_count,
    )
    return MixResult(
        clip=mixed, preclip=preclip, noise_component=noise_component, alpha=alpha, offset=offset
    )


def mix_at_snr(clean: AudioClip, noise: AudioClip, snr_db: float, rng_seed: int) -> AudioClip:
    """Hard-clipped mixture of clean speech and scaled noise at the requested SNR."""
    return mix_components(clean, noise, snr_db, rng_seed).clip
