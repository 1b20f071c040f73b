"""Segmental signal-to-noise ratio"""

import numpy as np

from seganforge.audio.clip import AudioClip
from seganforge.exceptions import DegenerateSignalError
from seganforge.metrics.framing import framed_pair
from seganforge.models.schemas import FrameSpec

SSNR_FLOOR_DB = -10.0
SSNR_CEILING_DB = 35.0
_EPS = np.finfo(np.float64).eps


def segmental_snr(
    clean: AudioClip,
    degraded: AudioClip,
    spec: FrameSpec | None = None,
    *,
    clipped: bool = True,
) -> float:
    """
    Mean per-frame SNR in dB.

    Each frame contributes 10 log10(sum clean^2 / sum (clean - degraded)^2), clipped to
    [-10, 35] dB. With ``clipped=False`` no limits are applied and frames with zero error or
    zero signal energy are left out.
    """
    spec = spec or FrameSpec()
    if not np.any(clean.samples):
        raise DegenerateSignalError(f"Clean signal is all zeros | utterance_id={clean.utterance_id}")
    clean_frames, degraded_frames, _ = framed_pair(clean, degraded, spec)
    signal_energy = np.sum(clean_frames**2, axis=1)
    error_energy = np.sum((clean_frames - degraded_frames) ** 2, axis=1)

    if clipped:
        per_frame = 10.0 * np.log10(signal_energy / (error_energy + _EPS) + _EPS)
        return float(np.mean(np.clip(per_frame, SSNR_FLOOR_DB, SSNR_CEILING_DB)))

    usable = (signal_energy > 0) & (error_energy > 0)
    if not np.any(usable):
        raise DegenerateSignalError("No frame has both signal and error energy")
    return float(np.mean(10.0 * np.log10(signal_energy[usable] / error_energy[usable])))
