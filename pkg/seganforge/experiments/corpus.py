"""Noisy corpus construction: round-robin condition grids over clean utterances"""

import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from seganforge.audio.clip import AudioClip
from seganforge.audio.manifest import write_manifest
from seganforge.audio.mixer import mix_at_snr
from seganforge.audio.wav import load_wav, write_wav
from seganforge.exceptions import DegenerateSignalError, SeganForgeError
from seganforge.models.schemas import TEST_SNRS_DB, TRAIN_SNRS_DB, ManifestRecord, NoiseCondition
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

TRAIN_MANIFEST = "train_manifest.tsv"
TEST_MANIFEST = "test_manifest.tsv"
DEFAULT_TEST_SPEAKERS = 2


@dataclass
class CorpusBuild:
    train_manifest: Path
    test_manifest: Path | None
    train_records: list[ManifestRecord] = field(default_factory=list)
    test_records: list[ManifestRecord] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)


def condition_grid(noise_types: Sequence[str], snrs_db: Sequence[float]) -> list[NoiseCondition]:
    return [NoiseCondition(noise_type=t, snr_db=float(s)) for t in noise_types for s in snrs_db]


def assign_conditions(n_utterances: int, conditions: Sequence[NoiseCondition]) -> list[NoiseCondition]:
    """Round-robin assignment: condition counts differ by at most one"""
    if not conditions:
        raise ValueError("At least one noise condition is required")
    return [conditions[index % len(conditions)] for index in range(n_utterances)]


def speaker_of(path: Path) -> str:
    """Speaker id is the file stem up to the first underscore"""
    return path.stem.split("_", 1)[0]


def _mix_seed(seed: int, split: str, index: int) -> int:
    split_key = 0 if split == "train" else 1
    return int(np.random.SeedSequence([seed, split_key, index]).generate_state(1)[0])


def _noise_files(noise_dir: Path, split: str | None) -> dict[str, Path]:
    directory = noise_dir / split if split else noise_dir
    return {path.stem: path for path in sorted(directory.glob("*.wav"))}


def _mix_split(
    split: str,
    clean_paths: list[Path],
    noises: dict[str, AudioClip],
    conditions: list[NoiseCondition],
    out_dir: Path,
    language: str,
    seed: int,
    skipped: list[str],
) -> list[ManifestRecord]:
    records: list[ManifestRecord] = []
    assigned = assign_conditions(len(clean_paths), conditions)
    for index, (clean_path, condition) in enumerate(zip(clean_paths, assigned, strict=True)):
        clean = load_wav(clean_path, speaker_id=speaker_of(clean_path), language=language)
        try:
            mixed = mix_at_snr(clean, noises[condition.noise_type], condition.snr_db, _mix_seed(seed, split, index))
        except DegenerateSignalError as exc:
            logger.warning(f"Skipping utterance | split={split} | path={clean_path} | error={exc}")
            skipped.append(str(clean_path))
            continue
        snr_tag = f"{condition.snr_db:g}".replace(".", "p")
        mixed_path = out_dir / split / f"{clean.utterance_id}__{condition.noise_type}__{snr_tag}.wav"
        write_wav(mixed, mixed_path)
        records.append(
            ManifestRecord(
                utterance_id=clean.utterance_id,
                speaker_id=clean.speaker_id,
                language=language,
                clean_path=os.path.relpath(clean_path, out_dir),
                noise_type=condition.noise_type,
                snr_db=condition.snr_db,
                mixed_path=os.path.relpath(mixed_path, out_dir),
                duration_s=clean.duration_s,
            )
        )
    return records


def build_corpus(
    clean_dir: str | Path,
    noise_dir: str | Path,
    out_dir: str | Path,
    *,
    train_noise_types: Sequence[str] | None = None,
    test_noise_types: Sequence[str] | None = None,
    test_speakers: Sequence[str] | None = None,
    train_snrs_db: Sequence[float] = TRAIN_SNRS_DB,
    test_snrs_db: Sequence[float] = TEST_SNRS_DB,
    language: str = "",
    seed: int = 0,
    allow_overlap: bool = False,
) -> CorpusBuild:
    """
    Mix clean utterances with noise into train and test grids and write their manifests.

    Noise files are ``<noise_dir>/train/*.wav`` and ``<noise_dir>/test/*.wav`` when those
    directories exist, otherwise ``<noise_dir>/*.wav`` filtered by the given type lists. Each
    clean utterance receives one (noise type, SNR) condition, assigned round-robin in sorted file
    order. Test utterances come only from ``test_speakers`` (default: the last two speakers
    when more than two exist), so no test speaker or sentence appears in training.

    Args:
        clean_dir: Directory of clean 16 kHz WAVs named ``<speaker>_<anything>.wav``
        noise_dir: Noise directory (see above)
        out_dir: Receives ``train/``, ``test/`` mixtures and both manifests
        train_noise_types: Restrict/override training noise types
        test_noise_types: Restrict/override test noise types; empty means no test grid
        test_speakers: Speakers held out for the test grid
        train_snrs_db: Training SNR grid
        test_snrs_db: Test SNR grid
        language: Language tag written into the manifests
        seed: Seed of the noise-offset draws
        allow_overlap: Permit noise types shared by the train and test grids

    Returns:
        CorpusBuild: Manifest paths, records and skipped (silent) inputs

    Raises:
        ValueError: Missing inputs, overlapping noise types without ``allow_overlap``, or a test
            grid with no held-out speaker
    """
    clean_dir, noise_dir, out_dir = Path(clean_dir), Path(noise_dir), Path(out_dir)
    if not clean_dir.is_dir():
        raise ValueError(f"Clean directory not found: {clean_dir}")
    if not noise_dir.is_dir():
        raise ValueError(f"Noise directory not found: {noise_dir}")
    clean_paths = sorted(clean_dir.glob("*.wav"))
    if not clean_paths:
        raise ValueError(f"No clean WAV files in {clean_dir}")

    split_layout = (noise_dir / "train").is_dir()
    if split_layout:
        pool_train = _noise_files(noise_dir, "train")
        pool_test = _noise_files(noise_dir, "test") if (noise_dir / "test").is_dir() else {}
    else:
        pool_train = pool_test = _noise_files(noise_dir, None)
    pool = pool_test | pool_train

    if train_noise_types is None:
        excluded = set(test_noise_types or ())
        train_noise_types = [t for t in pool_train if split_layout or t not in excluded]
    if test_noise_types is None:
        test_noise_types = list(pool_test) if split_layout else []
    missing = sorted({t for t in [*train_noise_types, *test_noise_types] if t not in pool})
    if missing:
        raise ValueError(f"Noise types without a WAV file: {missing}")
    train_files = {t: pool[t] for t in train_noise_types}
    test_files = {t: pool[t] for t in test_noise_types}
    if not train_files:
        raise ValueError(f"No training noise files found under {noise_dir}")
    overlap = sorted(set(train_files) & set(test_files))
    if overlap and not allow_overlap:
        raise ValueError(f"Train and test noise types overlap: {overlap} (set allow_overlap to permit)")
    if overlap:
        logger.warning(f"Train/test noise types overlap | types={overlap}")

    speakers = sorted({speaker_of(path) for path in clean_paths})
    if test_speakers is None:
        test_speakers = speakers[-DEFAULT_TEST_SPEAKERS:] if len(speakers) > DEFAULT_TEST_SPEAKERS else []
    unknown = sorted(set(test_speakers) - set(speakers))
    if unknown:
        raise ValueError(f"Test speakers not found in {clean_dir}: {unknown}")
    held_out = set(test_speakers) if test_files else set()
    if test_files and not held_out:
        raise ValueError(
            f"A test grid needs held-out speakers; {len(speakers)} speaker(s) found, "
            f"set test_speakers explicitly"
        )
    train_clean = [path for path in clean_paths if speaker_of(path) not in held_out]
    test_clean = [path for path in clean_paths if speaker_of(path) in held_out]

    def _load_noises(files: dict[str, Path]) -> dict[str, AudioClip]:
        return {noise_type: load_wav(path, utterance_id=noise_type) for noise_type, path in files.items()}

    skipped: list[str] = []
    train_records = _mix_split(
        "train",
        train_clean,
        _load_noises(train_files),
        condition_grid(sorted(train_files), train_snrs_db),
        out_dir,
        language,
        seed,
        skipped,
    )
    train_manifest = out_dir / TRAIN_MANIFEST
    write_manifest(train_records, train_manifest)

    test_records: list[ManifestRecord] = []
    test_manifest = None
    if test_files:
        test_records = _mix_split(
            "test",
            test_clean,
            _load_noises(test_files),
            condition_grid(sorted(test_files), test_snrs_db),
            out_dir,
            language,
            seed,
            skipped,
        )
        test_manifest = out_dir / TEST_MANIFEST
        write_manifest(test_records, test_manifest)

    if not train_records:
        raise SeganForgeError("Every clean utterance was skipped; no training rows written")
    logger.info(
        f"Corpus built | out_dir={out_dir} | train_rows={len(train_records)} | "
        f"test_rows={len(test_records)} | skipped={len(skipped)} | train_types={len(train_files)} | "
        f"test_types={len(test_files)}"
    )
    return CorpusBuild(
        train_manifest=train_manifest,
        test_manifest=test_manifest,
        train_records=train_records,
        test_records=test_records,
        skipped=skipped,
    )
