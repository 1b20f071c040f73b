"""Weighted spectral slope distance over critical-band spectra"""

from functools import lru_cache

import numpy as np

from seganforge.audio.clip import AudioClip
from seganforge.exceptions import DegenerateSignalError
from seganforge.metrics.framing import framed_pair, lowest_fraction_mean
from seganforge.models.schemas import FrameSpec

K_MAX = 20.0
K_LOC_MAX = 1.0
ENERGY_FLOOR = 1e-10

CENTER_FREQS_HZ = np.array(
    [
        50.0, 120.0, 190.0, 260.0, 330.0, 400.0, 470.0, 540.0, 617.372, 703.378, 798.717,
        904.128, 1020.38, 1148.30, 1288.72, 1442.54, 1610.70, 1794.16, 1993.93, 2211.08,
        2446.71, 2701.97, 2978.04, 3276.17, 3597.63,
    ]
)  # fmt: skip
BANDWIDTHS_HZ = np.array(
    [
        70.0, 70.0, 70.0, 70.0, 70.0, 70.0, 70.0, 77.3724, 86.0056, 95.3398, 105.411, 116.256,
        127.914, 140.423, 153.823, 168.154, 183.457, 199.776, 217.153, 235.631, 255.255,
        276.072, 298.126, 321.465, 346.136,
    ]
)  # fmt: skip
N_BANDS = CENTER_FREQS_HZ.shape[0]


def fft_length(frame_len: int) -> int:
    return int(2 ** np.ceil(np.log2(2 * frame_len)))


@lru_cache(maxsize=8)
def critical_band_filters(n_fft: int, sample_rate_hz: int) -> np.ndarray:
    """[25, n_fft / 2] Gaussian-shaped band filters truncated below -30 dB"""
    half = n_fft // 2
    max_freq = sample_rate_hz / 2.0
    min_factor = np.exp(-30.0 / (2.0 * 2.303))
    bins = np.arange(half)
    filters = np.zeros((N_BANDS, half))
    for band in range(N_BANDS):
        f0 = np.floor(CENTER_FREQS_HZ[band] / max_freq * half)
        bw = BANDWIDTHS_HZ[band] / max_freq * half
        norm_factor = np.log(BANDWIDTHS_HZ[0]) - np.log(BANDWIDTHS_HZ[band])
        response = np.exp(-11.0 * ((bins - f0) / bw) ** 2 + norm_factor)
        filters[band] = response * (response > min_factor)
    filters.setflags(write=False)
    return filters


def band_energies_db(frames: np.ndarray, sample_rate_hz: int) -> np.ndarray:
    n_fft = fft_length(frames.shape[1])
    spectrum = np.abs(np.fft.fft(frames, n=n_fft, axis=1)) ** 2
    energies = spectrum[:, : n_fft // 2] @ critical_band_filters(n_fft, sample_rate_hz).T
    return 10.0 * np.log10(np.maximum(energies, ENERGY_FLOOR))


def _nearest_peaks(energy: np.ndarray, slope: np.ndarray) -> np.ndarray:
    """Energy of the spectral peak each band climbs towards (rightwards on a rising slope)."""
    peaks = np.zeros(N_BANDS - 1)
    for band in range(N_BANDS - 1):
        n = band
        if slope[band] > 0:
            while n < N_BANDS - 1 and slope[n] > 0:
                n += 1
            peaks[band] = energy[n - 1]
        else:
            while n >= 0 and slope[n] <= 0:
                n -= 1
            peaks[band] = energy[n + 1]
    return peaks


def _band_weights(energy: np.ndarray, slope: np.ndarray) -> np.ndarray:
    lower = energy[: N_BANDS - 1]
    w_max = K_MAX / (K_MAX + energy.max() - lower)
    w_loc = K_LOC_MAX / (K_LOC_MAX + _nearest_peaks(energy, slope) - lower)
    return w_max * w_loc


def wss_frames(clean: AudioClip, degraded: AudioClip, spec: FrameSpec | None = None) -> np.ndarray:
    """Per-frame weighted squared difference of critical-band spectral slopes"""
    spec = spec or FrameSpec()
    clean_frames, degraded_frames, fs = framed_pair(clean, degraded, spec)
    clean_db = band_energies_db(clean_frames, fs)
    degraded_db = band_energies_db(degraded_frames, fs)
    distances = np.zeros(clean_db.shape[0])
    for index in range(clean_db.shape[0]):
        clean_slope = np.diff(clean_db[index])
        degraded_slope = np.diff(degraded_db[index])
        weights = 0.5 * (
            _band_weights(clean_db[index], clean_slope)
            + _band_weights(degraded_db[index], degraded_slope)
        )
        distances[index] = np.sum(weights * (clean_slope - degraded_slope) ** 2) / np.sum(weights)
    if distances.shape[0] == 0:
        raise DegenerateSignalError("No frames available for WSS")
    return distances


def wss(clean: AudioClip, degraded: AudioClip, spec: FrameSpec | None = None) -> float:
    """Mean WSS over the lowest 95% of frames"""
    return lowest_fraction_mean(wss_frames(clean, degraded, spec))
