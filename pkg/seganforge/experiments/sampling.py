"""Seeded subset draws for the experiment sweeps"""

from collections.abc import Sequence

import numpy as np

from seganforge.audio.manifest import total_duration
from seganforge.exceptions import InsufficientCorpusError
from seganforge.models.schemas import ManifestRecord

# float slack when the target equals the corpus duration
_DURATION_TOLERANCE_S = 1e-9


def sample_training_subset(
    records: Sequence[ManifestRecord], target_duration_s: float, seed: int
) -> list[ManifestRecord]:
    """
    Shuffle with ``seed`` and take utterances until their summed duration reaches the target.

    The utterance that crosses the target is included whole.

    Raises:
        ValueError: Non-positive target
        InsufficientCorpusError: The manifest is shorter than the target
    """
    if target_duration_s <= 0:
        raise ValueError(f"target_duration_s must be positive, got {target_duration_s}")
    available = total_duration(list(records))
    if available + _DURATION_TOLERANCE_S < target_duration_s:
        raise InsufficientCorpusError(
            f"Corpus holds {available:.2f} s, fewer than the requested {target_duration_s:.2f} s"
        )
    order = np.random.default_rng(seed).permutation(len(records))
    subset: list[ManifestRecord] = []
    accumulated = 0.0
    for index in order:
        record = records[int(index)]
        subset.append(record)
        accumulated += record.duration_s
        if accumulated + _DURATION_TOLERANCE_S >= target_duration_s:
            break
    return subset


def sample_noise_types(all_types: Sequence[str], count: int, seed: int) -> list[str]:
    """Seeded draw of ``count`` distinct noise types, in draw order"""
    if not 1 <= count <= len(all_types):
        raise ValueError(f"count must be in [1, {len(all_types)}], got {count}")
    picks = np.random.default_rng(seed).choice(len(all_types), size=count, replace=False)
    return [all_types[int(index)] for index in picks]
