"""Linear prediction and the log-likelihood ratio distance"""

import numpy as np
from scipy.linalg import toeplitz

from seganforge.audio.clip import AudioClip
from seganforge.exceptions import DegenerateFrameError, DegenerateSignalError
from seganforge.metrics.framing import framed_pair, lowest_fraction_mean
from seganforge.models.schemas import FrameSpec

DEFAULT_LPC_ORDER = 10


def autocorrelation(frame: np.ndarray, order: int) -> np.ndarray:
    """r[k] = sum_n x[n] x[n + k] for k = 0..order"""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape[0] <= order:
        raise ValueError(f"Frame length {frame.shape[0]} must exceed LPC order {order}")
    full = np.correlate(frame, frame, mode="full")
    mid = frame.shape[0] - 1
    return full[mid : mid + order + 1]


def levinson_durbin(r: np.ndarray, order: int) -> np.ndarray:
    """
    Solve the Toeplitz normal equations for the prediction polynomial.

    Returns a[0..order] with a[0] = 1 so that sum_k a[k] x[n - k] is the prediction error.

    Raises:
        DegenerateFrameError: r[0] is zero
    """
    if r[0] <= 0.0:
        raise DegenerateFrameError("Autocorrelation r[0] is zero")
    a = np.zeros(order + 1)
    a[0] = 1.0
    error = float(r[0])
    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1 : 0 : -1])
        k = -acc / error
        previous = a.copy()
        a[1:i] = previous[1:i] + k * previous[i - 1 : 0 : -1]
        a[i] = k
        error *= 1.0 - k * k
        if error <= 0.0:
            # perfectly predictable frame; higher-order terms stay zero
            break
    return a


def lpc_coefficients(frame: np.ndarray, order: int = DEFAULT_LPC_ORDER) -> np.ndarray:
    """LPC polynomial a[0..order] of a (pre-windowed) frame"""
    return levinson_durbin(autocorrelation(frame, order), order)


def llr_frames(
    clean: AudioClip,
    degraded: AudioClip,
    spec: FrameSpec | None = None,
    order: int = DEFAULT_LPC_ORDER,
) -> np.ndarray:
    """
    Per-frame log-likelihood ratio log((a_d R_c a_d') / (a_c R_c a_c')).

    Frames whose clean or degraded autocorrelation vanishes are skipped. Rounding can push
    the ratio a hair below one; such values are floored at zero.
    """
    spec = spec or FrameSpec()
    clean_frames, degraded_frames, _ = framed_pair(clean, degraded, spec)
    distances: list[float] = []
    for clean_frame, degraded_frame in zip(clean_frames, degraded_frames, strict=True):
        r_clean = autocorrelation(clean_frame, order)
        r_degraded = autocorrelation(degraded_frame, order)
        try:
            a_clean = levinson_durbin(r_clean, order)
            a_degraded = levinson_durbin(r_degraded, order)
        except DegenerateFrameError:
            continue
        r_matrix = toeplitz(r_clean)
        numerator = a_degraded @ r_matrix @ a_degraded
        denominator = a_clean @ r_matrix @ a_clean
        distances.append(max(0.0, float(np.log(numerator / denominator))))
    if not distances:
        raise DegenerateSignalError("All frames are degenerate for LLR")
    return np.asarray(distances)


def llr(
    clean: AudioClip,
    degraded: AudioClip,
    spec: FrameSpec | None = None,
    order: int = DEFAULT_LPC_ORDER,
) -> float:
    """Mean LLR over the lowest 95% of frames"""
    return lowest_fraction_mean(llr_frames(clean, degraded, spec, order))
