"""Training pairs: aligned, preemphasized (clean, noisy) windows"""

import hashlib
from collections.abc import Sequence

import numpy as np

from seganforge.audio.clip import AudioClip, Chunk
from seganforge.audio.dsp import DEFAULT_PREEMPHASIS, chunk_signal, preemphasis
from seganforge.exceptions import ShapeError

ChunkPair = tuple[Chunk, Chunk]


def make_training_pairs(
    clean_clips: Sequence[AudioClip],
    noisy_clips: Sequence[AudioClip],
    window_len: int,
    overlap: float = 0.0,
    preemph: float = DEFAULT_PREEMPHASIS,
) -> list[ChunkPair]:
    """
    Preemphasize aligned clean/noisy clips and cut both into matching windows.

    Args:
        clean_clips: Clean references
        noisy_clips: Noisy versions, same order and lengths as ``clean_clips``
        window_len: Window length in samples (the model's W)
        overlap: Training-time overlap fraction between consecutive windows
        preemph: Preemphasis coefficient applied to both signals

    Returns:
        list[ChunkPair]: (clean chunk, noisy chunk) pairs

    Raises:
        ShapeError: Clip lists or clip lengths do not line up
    """
    if len(clean_clips) != len(noisy_clips):
        raise ShapeError(f"{len(clean_clips)} clean clips but {len(noisy_clips)} noisy clips")
    pairs: list[ChunkPair] = []
    for clean, noisy in zip(clean_clips, noisy_clips, strict=True):
        if len(clean) != len(noisy):
            raise ShapeError(
                f"Clean and noisy lengths differ | utterance_id={clean.utterance_id} | "
                f"clean={len(clean)} | noisy={len(noisy)}"
            )
        clean.require_rate()
        noisy.require_rate()
        clean_chunks = chunk_signal(preemphasis(clean, preemph), window_len, overlap)
        noisy_chunks = chunk_signal(preemphasis(noisy, preemph), window_len, overlap)
        pairs.extend(zip(clean_chunks, noisy_chunks, strict=True))
    return pairs


def corpus_fingerprint(pairs: Sequence[ChunkPair]) -> str:
    """SHA-256 over the float32 bytes of every pair, in order"""
    digest = hashlib.sha256()
    for clean, noisy in pairs:
        digest.update(np.ascontiguousarray(clean.samples, dtype="<f4").tobytes())
        digest.update(np.ascontiguousarray(noisy.samples, dtype="<f4").tobytes())
    return digest.hexdigest()
