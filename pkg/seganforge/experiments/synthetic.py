"""Synthetic desk-scale corpus: tone-complex "speech" and procedurally generated noises

Every signal is drawn from a seeded numpy stream, so a seed fully determines the corpus bytes.
"""

from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal

from seganforge.audio.clip import AudioClip
from seganforge.audio.wav import write_wav
from seganforge.models.schemas import CANONICAL_SAMPLE_RATE_HZ
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

FS = CANONICAL_SAMPLE_RATE_HZ
NOISE_RMS = 0.1
SPEECH_PEAK = 0.5

# Two training families for transfer experiments plus a disjoint test pool
FAMILY_A: tuple[str, ...] = ("white", "pink", "brown", "hum50", "babble")
FAMILY_B: tuple[str, ...] = ("crackle", "siren", "engine", "lowband", "highband")
TRAIN_NOISE_TYPES: tuple[str, ...] = FAMILY_A + FAMILY_B
TEST_NOISE_TYPES: tuple[str, ...] = ("violet", "hum60", "chirp", "clicks", "midband")


def _rms_normalize(samples: np.ndarray, target: float = NOISE_RMS) -> np.ndarray:
    rms = float(np.sqrt(np.mean(np.square(samples))))
    return samples * (target / rms) if rms > 0 else samples


def _colored(n: int, rng: np.random.Generator, exponent: float) -> np.ndarray:
    """Gaussian noise with power spectrum proportional to f^-exponent"""
    freqs = np.fft.rfftfreq(n, 1.0 / FS)
    spectrum = rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size)
    spectrum /= np.maximum(freqs, 1.0) ** (exponent / 2.0)
    return np.fft.irfft(spectrum, n=n)


def _hum(n: int, rng: np.random.Generator, mains_hz: float) -> np.ndarray:
    t = np.arange(n) / FS
    phases = rng.uniform(0, 2 * np.pi, size=6)
    hum = sum(np.sin(2 * np.pi * mains_hz * k * t + phases[k - 1]) / k for k in range(1, 7))
    return hum + 0.05 * rng.standard_normal(n)


def _band(n: int, rng: np.random.Generator, low_hz: float, high_hz: float) -> np.ndarray:
    sos = signal.butter(4, [low_hz, high_hz], btype="bandpass", fs=FS, output="sos")
    return signal.sosfilt(sos, rng.standard_normal(n))


def _babble(n: int, rng: np.random.Generator) -> np.ndarray:
    voices = [
        tone_complex(n, rng, f0_range=(float(lo), float(lo) * 1.6))
        for lo in rng.uniform(90.0, 240.0, size=6)
    ]
    return np.sum(voices, axis=0)


def _crackle(n: int, rng: np.random.Generator) -> np.ndarray:
    impulses = np.where(rng.random(n) < 0.002, rng.standard_normal(n) * 8.0, 0.0)
    return impulses + 0.1 * rng.standard_normal(n)


def _siren(n: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(n) / FS
    rate = rng.uniform(0.3, 0.8)
    inst_freq = 900.0 + 300.0 * np.sin(2 * np.pi * rate * t)
    return np.sin(2 * np.pi * np.cumsum(inst_freq) / FS)


def _engine(n: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(n) / FS
    rpm_hz = rng.uniform(25.0, 40.0)
    wobble = 1.0 + 0.3 * np.sin(2 * np.pi * 1.5 * t)
    firing = sum(np.sin(2 * np.pi * rpm_hz * k * t) / k for k in range(1, 9)) * wobble
    return firing + 0.5 * _rms_normalize(_colored(n, rng, 2.0), 1.0)


def _chirp(n: int, rng: np.random.Generator) -> np.ndarray:
    period = int(FS * rng.uniform(0.4, 0.9))
    t = np.arange(period) / FS
    sweep = signal.chirp(t, f0=200.0, t1=t[-1], f1=4000.0, method="logarithmic")
    return np.resize(sweep, n)


def _clicks(n: int, rng: np.random.Generator) -> np.ndarray:
    out = 0.05 * rng.standard_normal(n)
    step = int(FS / rng.uniform(6.0, 10.0))
    out[rng.integers(0, step) :: step] += 10.0
    return out


NOISE_GENERATORS: dict[str, Callable[[int, np.random.Generator], np.ndarray]] = {
    "white": lambda n, rng: rng.standard_normal(n),
    "pink": lambda n, rng: _colored(n, rng, 1.0),
    "brown": lambda n, rng: _colored(n, rng, 2.0),
    "violet": lambda n, rng: _colored(n, rng, -2.0),
    "hum50": lambda n, rng: _hum(n, rng, 50.0),
    "hum60": lambda n, rng: _hum(n, rng, 60.0),
    "babble": _babble,
    "crackle": _crackle,
    "siren": _siren,
    "engine": _engine,
    "lowband": lambda n, rng: _band(n, rng, 100.0, 800.0),
    "highband": lambda n, rng: _band(n, rng, 3000.0, 7000.0),
    "midband": lambda n, rng: _band(n, rng, 800.0, 3000.0),
    "chirp": _chirp,
    "clicks": _clicks,
}


def tone_complex(
    n: int, rng: np.random.Generator, f0_range: tuple[float, float] = (100.0, 200.0)
) -> np.ndarray:
    """
    Speech stand-in: harmonic complex with a wandering pitch and syllable-like bursts.

    Syllables last 120-320 ms with raised-cosine envelopes, separated by 40-160 ms pauses.
    """
    t = np.arange(n) / FS
    lo, hi = f0_range
    drift = np.cumsum(rng.standard_normal(n)) / np.sqrt(FS)
    f0 = lo + (hi - lo) * (0.5 + 0.5 * np.tanh(drift))
    phase = 2 * np.pi * np.cumsum(f0) / FS
    n_harmonics = 10
    formant = rng.uniform(400.0, 1200.0)
    voiced = sum(
        np.sin(k * phase) * np.exp(-(((k * f0) - formant) ** 2) / (2 * 600.0**2)) / np.sqrt(k)
        for k in range(1, n_harmonics + 1)
    )

    envelope = np.zeros(n)
    pos = int(rng.integers(0, int(0.05 * FS)))
    while pos < n:
        length = int(rng.uniform(0.12, 0.32) * FS)
        end = min(n, pos + length)
        envelope[pos:end] = np.hanning(length)[: end - pos] * rng.uniform(0.5, 1.0)
        pos = end + int(rng.uniform(0.04, 0.16) * FS)
    out = voiced * envelope + 1e-4 * np.sin(2 * np.pi * 30.0 * t)
    peak = float(np.max(np.abs(out)))
    return out * (SPEECH_PEAK / peak) if peak > 0 else out


def synth_utterance(
    utterance_id: str,
    duration_s: float,
    seed: int,
    *,
    speaker_id: str = "spk0",
    f0_range: tuple[float, float] = (100.0, 200.0),
    language: str = "synthetic",
) -> AudioClip:
    rng = np.random.default_rng(seed)
    samples = tone_complex(int(round(duration_s * FS)), rng, f0_range)
    return AudioClip(
        samples=samples, utterance_id=utterance_id, speaker_id=speaker_id, language=language
    )


def synth_noise(noise_type: str, duration_s: float, seed: int) -> AudioClip:
    """Noise clip of ``noise_type`` normalized to a fixed RMS"""
    try:
        generator = NOISE_GENERATORS[noise_type]
    except KeyError:
        raise ValueError(f"Unknown synthetic noise type {noise_type!r}") from None
    rng = np.random.default_rng(seed)
    samples = _rms_normalize(generator(int(round(duration_s * FS)), rng))
    return AudioClip(samples=np.clip(samples, -1.0, 1.0), utterance_id=noise_type)


@dataclass
class SyntheticCorpus:
    clean_dir: Path
    noise_dir: Path
    train_noise_types: list[str] = field(default_factory=list)
    test_noise_types: list[str] = field(default_factory=list)
    speakers: list[str] = field(default_factory=list)


def generate_synthetic_corpus(
    out_dir: str | Path,
    *,
    n_speakers: int = 6,
    utterances_per_speaker: int = 10,
    utterance_s: float = 3.0,
    noise_s: float = 20.0,
    train_noise_types: tuple[str, ...] = TRAIN_NOISE_TYPES,
    test_noise_types: tuple[str, ...] = TEST_NOISE_TYPES,
    seed: int = 0,
) -> SyntheticCorpus:
    """
    Write ``clean/<speaker>_<index>.wav`` plus ``noise/train/<type>.wav`` and
    ``noise/test/<type>.wav`` under ``out_dir``.

    Each speaker gets its own pitch range, so held-out speakers sound different from the
    training ones.
    """
    out_dir = Path(out_dir)
    clean_dir = out_dir / "clean"
    noise_dir = out_dir / "noise"
    root = np.random.SeedSequence(seed)
    speaker_seq, noise_seq = root.spawn(2)

    speakers = [f"spk{index:02d}" for index in range(n_speakers)]
    for speaker, seq in zip(speakers, speaker_seq.spawn(n_speakers), strict=True):
        profile_rng = np.random.default_rng(seq.spawn(1)[0])
        low = float(profile_rng.uniform(85.0, 230.0))
        f0_range = (low, low * float(profile_rng.uniform(1.3, 1.8)))
        for index, utt_seq in enumerate(seq.spawn(utterances_per_speaker)):
            utterance_id = f"{speaker}_{index:03d}"
            clip = synth_utterance(
                utterance_id,
                utterance_s,
                int(utt_seq.generate_state(1)[0]),
                speaker_id=speaker,
                f0_range=f0_range,
            )
            write_wav(clip, clean_dir / f"{utterance_id}.wav")

    all_types = list(train_noise_types) + list(test_noise_types)
    for noise_type, seq in zip(all_types, noise_seq.spawn(len(all_types)), strict=True):
        subdir = "train" if noise_type in train_noise_types else "test"
        clip = synth_noise(noise_type, noise_s, int(seq.generate_state(1)[0]))
        write_wav(clip, noise_dir / subdir / f"{noise_type}.wav")

    logger.info(
        f"Synthetic corpus written | out_dir={out_dir} | speakers={n_speakers} | "
        f"utterances={n_speakers * utterances_per_speaker} | noise_types={len(all_types)} | seed={seed}"
    )
    return SyntheticCorpus(
        clean_dir=clean_dir,
        noise_dir=noise_dir,
        train_noise_types=list(train_noise_types),
        test_noise_types=list(test_noise_types),
        speakers=speakers,
    )
