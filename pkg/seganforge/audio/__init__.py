"""Waveform containers, WAV I/O, preemphasis, chunking and SNR-controlled mixing"""

from seganforge.audio.clip import AudioClip, Chunk
from seganforge.audio.dsp import chunk_signal, deemphasis, preemphasis, reconstruct
from seganforge.audio.manifest import (
    load_record_clips,
    manifest_fingerprint,
    read_manifest,
    total_duration,
    write_manifest,
)
from seganforge.audio.mixer import MixResult, measure_snr, mix_at_snr, mix_components
from seganforge.audio.wav import load_wav, write_wav

__all__ = [
    "AudioClip",
    "Chunk",
    "MixResult",
    "chunk_signal",
    "deemphasis",
    "load_record_clips",
    "load_wav",
    "manifest_fingerprint",
    "measure_snr",
    "mix_at_snr",
    "mix_components",
    "preemphasis",
    "read_manifest",
    "reconstruct",
    "total_duration",
    "write_manifest",
    "write_wav",
]
