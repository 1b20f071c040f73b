"""Composite MOS predictors built from PESQ, LLR, WSS and segmental SNR"""

import numpy as np

MOS_MIN = 1.0
MOS_MAX = 5.0


def _clamp(value: float) -> float:
    return float(np.clip(value, MOS_MIN, MOS_MAX))


def composite_measures(pesq: float, llr: float, wss: float, ssnr: float) -> tuple[float, float, float]:
    """
    Linear-regression MOS predictors, each clamped to [1, 5].

    Returns:
        (csig, cbak, covl): signal distortion, background intrusiveness, overall quality
    """
    csig = 3.093 - 1.029 * llr + 0.603 * pesq - 0.009 * wss
    cbak = 1.634 + 0.478 * pesq - 0.007 * wss + 0.063 * ssnr
    covl = 1.594 + 0.805 * pesq - 0.512 * llr - 0.007 * wss
    return _clamp(csig), _clamp(cbak), _clamp(covl)
