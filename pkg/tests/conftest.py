"""Shared fixtures: seeded generators, synthetic clips and a tiny mixed corpus"""

from pathlib import Path

import numpy as np
import pytest

from seganforge.audio.clip import AudioClip
from seganforge.config import settings
from seganforge.experiments.corpus import CorpusBuild, build_corpus
from seganforge.experiments.synthetic import generate_synthetic_corpus, synth_utterance

FS = 16000


@pytest.fixture(autouse=True)
def _log_dir(tmp_path_factory, monkeypatch):
    """Keep rotating log files out of the working tree"""
    logs = str(tmp_path_factory.getbasetemp() / "logs")
    monkeypatch.setenv("SEGANFORGE_LOG_DIR", logs)
    monkeypatch.setattr(settings, "LOG_DIR", logs)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def speech_clip() -> AudioClip:
    """One second of tone-complex speech stand-in"""
    return synth_utterance("spk00_000", 1.0, seed=7, speaker_id="spk00")


@pytest.fixture
def noise_clip(rng) -> AudioClip:
    return AudioClip(samples=0.1 * rng.standard_normal(3 * FS), utterance_id="white")


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory) -> CorpusBuild:
    """Three synthetic speakers, two training noises, one test noise; spk02 held out"""
    root: Path = tmp_path_factory.mktemp("tiny_corpus")
    synthetic = generate_synthetic_corpus(
        root / "source",
        n_speakers=3,
        utterances_per_speaker=3,
        utterance_s=0.5,
        noise_s=2.0,
        train_noise_types=("white", "pink"),
        test_noise_types=("violet",),
        seed=3,
    )
    return build_corpus(
        synthetic.clean_dir,
        synthetic.noise_dir,
        root / "mixed",
        test_speakers=["spk02"],
        test_snrs_db=[7.5],
        seed=3,
    )
