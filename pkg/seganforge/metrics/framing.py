"""Frame extraction shared by the DSP quality metrics"""

import numpy as np
from scipy.signal import windows

from seganforge.audio.clip import AudioClip
from seganforge.exceptions import DegenerateSignalError
from seganforge.models.schemas import FrameSpec


def analysis_window(length: int) -> np.ndarray:
    """Hanning window without the zero end points: 0.5 * (1 - cos(2 pi n / (N + 1))), n = 1..N"""
    return windows.hann(length + 2, sym=True)[1:-1]


def frame_matrix(samples: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """[n_frames, frame_len] matrix of full frames (partial tail dropped)"""
    if samples.shape[0] < frame_len:
        return np.zeros((0, frame_len))
    n_frames = 1 + (samples.shape[0] - frame_len) // hop
    starts = np.arange(n_frames) * hop
    return samples[starts[:, None] + np.arange(frame_len)[None, :]]


def framed_pair(
    clean: AudioClip, degraded: AudioClip, spec: FrameSpec
) -> tuple[np.ndarray, np.ndarray, int]:
    """
    Trim both clips to the shorter length and cut windowed frames.

    Returns:
        (clean_frames, degraded_frames, sample_rate_hz)

    Raises:
        ValueError: Sample rates differ
        DegenerateSignalError: Overlap shorter than one frame
    """
    if clean.sample_rate_hz != degraded.sample_rate_hz:
        raise ValueError(
            f"Sample rates differ | clean={clean.sample_rate_hz} | degraded={degraded.sample_rate_hz}"
        )
    fs = clean.sample_rate_hz
    n = min(len(clean), len(degraded))
    frame_len = spec.frame_length(fs)
    if n < frame_len:
        raise DegenerateSignalError(
            f"Signals shorter than one analysis frame | samples={n} | frame_len={frame_len}"
        )
    hop = spec.hop_length(fs)
    window = analysis_window(frame_len)
    clean_frames = frame_matrix(clean.samples[:n], frame_len, hop) * window
    degraded_frames = frame_matrix(degraded.samples[:n], frame_len, hop) * window
    return clean_frames, degraded_frames, fs


def lowest_fraction_mean(values: np.ndarray, fraction: float = 0.95) -> float:
    """Mean of the lowest ``fraction`` of values (count rounded half up, at least one)."""
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    keep = max(1, int(np.floor(ordered.shape[0] * fraction + 0.5)))
    return float(np.mean(ordered[:keep]))
