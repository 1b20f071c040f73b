"""Corpus manifests: one tab-separated record per mixed utterance"""

import csv
import hashlib
from pathlib import Path

from seganforge.audio.clip import AudioClip
from seganforge.audio.wav import load_wav
from seganforge.models.schemas import ManifestRecord

MANIFEST_COLUMNS = (
    "utterance_id",
    "speaker_id",
    "language",
    "clean_path",
    "noise_type",
    "snr_db",
    "mixed_path",
    "duration_s",
)


def write_manifest(records: list[ManifestRecord], path: str | Path) -> None:
    """Write records with a header row; floats use repr so values round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for record in records:
            writer.writerow([getattr(record, column) for column in MANIFEST_COLUMNS])


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    """Read a manifest; relative audio paths are resolved against the manifest's directory."""
    path = Path(path)
    base = path.parent
    records: list[ManifestRecord] = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle, delimiter="\t")
        missing = set(MANIFEST_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"Manifest missing columns | path={path} | columns={sorted(missing)}")
        for row in reader:
            for key in ("clean_path", "mixed_path"):
                if row[key] and not Path(row[key]).is_absolute():
                    row[key] = str(base / row[key])
            records.append(ManifestRecord(**{column: row[column] for column in MANIFEST_COLUMNS}))
    return records


def manifest_fingerprint(path: str | Path) -> str:
    """SHA-256 of the manifest bytes, used to freeze test sets"""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def total_duration(records: list[ManifestRecord]) -> float:
    return float(sum(record.duration_s for record in records))


def load_record_clips(record: ManifestRecord) -> tuple[AudioClip, AudioClip]:
    """(clean, mixed) clips of one record, both tagged with the record's noise condition"""
    tags = {
        "utterance_id": record.utterance_id,
        "speaker_id": record.speaker_id,
        "language": record.language,
    }
    clean = load_wav(record.clean_path, **tags)
    mixed = load_wav(record.mixed_path, **tags)
    condition = record.condition
    return (
        clean.with_samples(clean.samples, condition=condition),
        mixed.with_samples(mixed.samples, condition=condition),
    )
