"""Signal carriers shared by every pipeline stage"""

from dataclasses import dataclass, field, replace

import numpy as np

from seganforge.exceptions import AudioFormatError, SampleRateError
from seganforge.models.schemas import CANONICAL_SAMPLE_RATE_HZ, NoiseCondition


@dataclass
class AudioClip:
    """Mono waveform with identity and noise-condition tags"""

    samples: np.ndarray
    sample_rate_hz: int = CANONICAL_SAMPLE_RATE_HZ
    utterance_id: str = ""
    speaker_id: str = ""
    language: str = ""
    condition: NoiseCondition | None = None
    clip_count: int = 0

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate_hz <= 0:
            raise AudioFormatError(f"Sample rate must be positive, got {self.sample_rate_hz}")
        if not np.all(np.isfinite(self.samples)):
            raise AudioFormatError(f"Non-finite samples in clip {self.utterance_id!r}")

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return len(self) / float(self.sample_rate_hz)

    def with_samples(self, samples: np.ndarray, **changes) -> "AudioClip":
        """Copy of this clip carrying new samples (tags preserved unless overridden)"""
        return replace(self, samples=samples, **changes)

    def require_rate(self, expected_hz: int = CANONICAL_SAMPLE_RATE_HZ) -> None:
        if self.sample_rate_hz != expected_hz:
            raise SampleRateError(self.sample_rate_hz, expected_hz)


@dataclass
class Chunk:
    """Fixed-length analysis window cut from a clip"""

    samples: np.ndarray
    source_utterance: str
    offset: int
    padded_tail: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def window_len(self) -> int:
        return int(self.samples.shape[0])
