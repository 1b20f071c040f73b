"""Preemphasis filtering and fixed-window chunking"""

import numpy as np
from scipy import signal

from seganforge.audio.clip import AudioClip, Chunk
from seganforge.exceptions import EmptyClipError

DEFAULT_PREEMPHASIS = 0.95


def _check_coef(coef: float) -> None:
    if not 0.0 <= coef < 1.0:
        raise ValueError(f"Preemphasis coefficient must be in [0, 1), got {coef}")


def preemphasis(clip: AudioClip, coef: float = DEFAULT_PREEMPHASIS) -> AudioClip:
    """First-order high-pass y[n] = x[n] - coef * x[n-1], with x[-1] = 0."""
    _check_coef(coef)
    if len(clip) == 0:
        raise EmptyClipError(f"Cannot filter empty clip | utterance_id={clip.utterance_id}")
    return clip.with_samples(signal.lfilter([1.0, -coef], [1.0], clip.samples))


def deemphasis(clip: AudioClip, coef: float = DEFAULT_PREEMPHASIS) -> AudioClip:
    """Inverse recursion of :func:`preemphasis`: y[n] = x[n] + coef * y[n-1]."""
    _check_coef(coef)
    if len(clip) == 0:
        raise EmptyClipError(f"Cannot filter empty clip | utterance_id={clip.utterance_id}")
    return clip.with_samples(signal.lfilter([1.0], [1.0, -coef], clip.samples))


def chunk_signal(clip: AudioClip, window_len: int, overlap_fraction: float = 0.0) -> list[Chunk]:
    """
    Cut a clip into fixed-length windows, zero-padding the last one.

    Args:
        clip: Source clip
        window_len: Window length in samples
        overlap_fraction: Fraction of a window shared with the next one, in [0, 1)

    Returns:
        list[Chunk]: Windows in offset order; empty for an empty clip
    """
    if window_len <= 0:
        raise ValueError(f"window_len must be positive, got {window_len}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")

    hop = max(1, int(window_len * (1.0 - overlap_fraction)))
    n = len(clip)
    chunks: list[Chunk] = []
    offset = 0
    while offset < n:
        window = clip.samples[offset : offset + window_len]
        padded_tail = window_len - window.shape[0]
        if padded_tail:
            window = np.concatenate([window, np.zeros(padded_tail)])
        chunks.append(
            Chunk(
                samples=np.array(window, dtype=np.float64),
                source_utterance=clip.utterance_id,
                offset=offset,
                padded_tail=padded_tail,
            )
        )
        if offset + window_len >= n:
            break
        offset += hop
    return chunks


def reconstruct(chunks: list[Chunk], length: int) -> np.ndarray:
    """Concatenate non-overlapping chunks and trim to ``length`` samples."""
    if not chunks:
        return np.zeros(0)
    return np.concatenate([chunk.samples for chunk in chunks])[:length]
