"""Waveform enhancement with a trained generator"""

from pathlib import Path

import numpy as np

from seganforge.audio.clip import AudioClip
from seganforge.audio.dsp import chunk_signal, deemphasis, preemphasis, reconstruct
from seganforge.exceptions import EmptyClipError
from seganforge.segan.checkpoint import ModelCheckpoint, load_checkpoint
from seganforge.segan.networks import Generator
from seganforge.tensorgrad import Tensor, no_grad
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_BATCH_SIZE = 32


def load_generator(ckpt: ModelCheckpoint) -> Generator:
    generator = Generator(ckpt.generator_config)
    generator.load_state_dict(ckpt.generator_params)
    return generator


def enhance(
    clip: AudioClip,
    ckpt: ModelCheckpoint | str | Path,
    seed: int = 0,
    *,
    batch_size: int = DEFAULT_BATCH_SIZE,
    generator: Generator | None = None,
) -> AudioClip:
    """
    Denoise ``clip``: preemphasis, non-overlapping windows, generator with seeded z per window,
    concatenation, tail trim and deemphasis.

    Args:
        clip: 16 kHz input clip
        ckpt: Checkpoint object or path to one
        seed: Seed of the latent draws; the same seed reproduces the same output
        batch_size: Windows per generator call
        generator: Pre-built generator for ``ckpt`` (skips rebuilding when enhancing many clips)

    Returns:
        AudioClip: Enhanced clip with the input's length and tags

    Raises:
        CheckpointFormatError: ``ckpt`` path cannot be loaded
        SampleRateError: Clip is not 16 kHz
    """
    if not isinstance(ckpt, ModelCheckpoint):
        ckpt = load_checkpoint(ckpt)
    clip.require_rate()
    if len(clip) == 0:
        raise EmptyClipError(f"Cannot enhance empty clip | utterance_id={clip.utterance_id}")
    generator = generator or load_generator(ckpt)
    coef = ckpt.provenance.preemph
    window_len = ckpt.generator_config.window_len

    chunks = chunk_signal(preemphasis(clip, coef), window_len, 0.0)
    rng = np.random.default_rng(seed)
    with no_grad():
        for start in range(0, len(chunks), batch_size):
            batch = chunks[start : start + batch_size]
            x_tilde = Tensor(np.stack([chunk.samples for chunk in batch])[:, None, :])
            z = generator.sample_z(len(batch), rng)
            x_hat = generator.forward(x_tilde, z).data
            for chunk, enhanced in zip(batch, x_hat, strict=True):
                chunk.samples = enhanced[0].astype(np.float64)

    enhanced = clip.with_samples(reconstruct(chunks, len(clip)), clip_count=0)
    logger.debug(f"Clip enhanced | utterance_id={clip.utterance_id} | chunks={len(chunks)}")
    return deemphasis(enhanced, coef)
