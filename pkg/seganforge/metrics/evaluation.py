"""Corpus-level evaluation with per-utterance and per-condition breakdowns"""

import csv
import tempfile
from collections import defaultdict
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from seganforge.audio.clip import AudioClip
from seganforge.audio.wav import write_wav
from seganforge.exceptions import SeganForgeError
from seganforge.metrics.composite import composite_measures
from seganforge.metrics.lpc import DEFAULT_LPC_ORDER, llr
from seganforge.metrics.pesq import PesqAdapter, pesq_external
from seganforge.metrics.snr import segmental_snr
from seganforge.metrics.wss import wss
from seganforge.models.schemas import FrameSpec, MetricsReport, UtteranceMetrics
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

CSV_COLUMNS = (
    "utterance_id",
    "noise_type",
    "snr_db",
    "pesq",
    "csig",
    "cbak",
    "covl",
    "ssnr",
    "llr",
    "wss",
    "status",
)


@dataclass
class EvaluationPair:
    """Clean reference and the signal to score against it"""

    clean: AudioClip
    degraded: AudioClip


@dataclass
class CorpusEvaluation:
    report: MetricsReport
    rows: list[UtteranceMetrics]
    by_condition: dict[tuple[str, float], MetricsReport] = field(default_factory=dict)
    by_noise_type: dict[str, MetricsReport] = field(default_factory=dict)


def evaluate_utterance(
    clean: AudioClip,
    degraded: AudioClip,
    spec: FrameSpec | None = None,
    adapter: PesqAdapter | None = None,
    *,
    lpc_order: int = DEFAULT_LPC_ORDER,
    ssnr_clipped: bool = True,
    workdir: Path | None = None,
) -> MetricsReport:
    """All metrics for one (clean, degraded) pair; composites only when PESQ is available."""
    spec = spec or FrameSpec()
    ssnr_value = segmental_snr(clean, degraded, spec, clipped=ssnr_clipped)
    llr_value = llr(clean, degraded, spec, lpc_order)
    wss_value = wss(clean, degraded, spec)

    pesq_value = None
    if adapter is not None:
        with tempfile.TemporaryDirectory(dir=workdir) as tmp:
            clean_path = Path(tmp) / "clean.wav"
            degraded_path = Path(tmp) / "degraded.wav"
            write_wav(clean, clean_path)
            write_wav(degraded, degraded_path)
            pesq_value = pesq_external(clean_path, degraded_path, adapter)

    csig = cbak = covl = None
    if pesq_value is not None:
        csig, cbak, covl = composite_measures(pesq_value, llr_value, wss_value, ssnr_value)
    return MetricsReport(
        pesq=pesq_value,
        csig=csig,
        cbak=cbak,
        covl=covl,
        ssnr=ssnr_value,
        llr=llr_value,
        wss=wss_value,
        n_utterances=1,
    )


def mean_report(reports: Iterable[MetricsReport]) -> MetricsReport:
    """Unweighted mean; PESQ and composites average over the reports that carry them"""
    reports = list(reports)
    if not reports:
        raise SeganForgeError("Cannot average an empty set of reports")

    def _mean(name: str) -> float | None:
        values = [getattr(report, name) for report in reports if getattr(report, name) is not None]
        return float(np.mean(values)) if values else None

    return MetricsReport(
        pesq=_mean("pesq"),
        csig=_mean("csig"),
        cbak=_mean("cbak"),
        covl=_mean("covl"),
        ssnr=_mean("ssnr"),
        llr=_mean("llr"),
        wss=_mean("wss"),
        n_utterances=len(reports),
    )


def _row_sort_key(row: UtteranceMetrics) -> tuple[str, str, float]:
    return (row.utterance_id, row.noise_type, row.snr_db if row.snr_db is not None else 0.0)


def evaluate_corpus(
    pairs: list[EvaluationPair],
    spec: FrameSpec | None = None,
    adapter: PesqAdapter | None = None,
    *,
    lpc_order: int = DEFAULT_LPC_ORDER,
    ssnr_clipped: bool = True,
    jobs: int = 1,
) -> CorpusEvaluation:
    """
    Evaluate every pair and reduce to corpus-level means.

    Failing utterances become flagged rows instead of aborting the corpus. Rows are merged in
    utterance_id order so the reduction does not depend on input order.

    Raises:
        ValueError: Empty pair list
        SeganForgeError: Every utterance failed
    """
    if not pairs:
        raise ValueError("evaluate_corpus needs at least one pair")
    spec = spec or FrameSpec()

    def _evaluate(pair: EvaluationPair) -> UtteranceMetrics:
        condition = pair.degraded.condition or pair.clean.condition
        row = UtteranceMetrics(
            utterance_id=pair.clean.utterance_id or pair.degraded.utterance_id,
            noise_type=condition.noise_type if condition else "",
            snr_db=condition.snr_db if condition else None,
        )
        try:
            row.report = evaluate_utterance(
                pair.clean,
                pair.degraded,
                spec,
                adapter,
                lpc_order=lpc_order,
                ssnr_clipped=ssnr_clipped,
            )
        except (SeganForgeError, ValueError) as exc:
            logger.warning(
                f"Utterance evaluation failed | utterance_id={row.utterance_id} | error={exc}"
            )
            row.status = "failed"
            row.error = str(exc)
        return row

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_evaluate, pairs))
    else:
        rows = [_evaluate(pair) for pair in pairs]
    rows.sort(key=_row_sort_key)

    ok_rows = [row for row in rows if row.status == "ok" and row.report is not None]
    if not ok_rows:
        raise SeganForgeError(f"All {len(rows)} utterances failed evaluation")

    by_condition_rows: dict[tuple[str, float], list[MetricsReport]] = defaultdict(list)
    by_type_rows: dict[str, list[MetricsReport]] = defaultdict(list)
    for row in ok_rows:
        if row.noise_type:
            by_condition_rows[(row.noise_type, row.snr_db or 0.0)].append(row.report)
            by_type_rows[row.noise_type].append(row.report)

    evaluation = CorpusEvaluation(
        report=mean_report(row.report for row in ok_rows),
        rows=rows,
        by_condition={key: mean_report(value) for key, value in sorted(by_condition_rows.items())},
        by_noise_type={key: mean_report(value) for key, value in sorted(by_type_rows.items())},
    )
    logger.info(
        f"Corpus evaluated | utterances={len(rows)} | failed={len(rows) - len(ok_rows)} | "
        f"ssnr={evaluation.report.ssnr:.3f} | llr={evaluation.report.llr:.3f} | "
        f"wss={evaluation.report.wss:.3f}"
    )
    return evaluation


def format_value(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def write_metrics_csv(rows: list[UtteranceMetrics], path: str | Path) -> None:
    """Per-utterance CSV; metric cells are empty when unavailable or when the row failed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            report = row.report
            writer.writerow(
                [
                    row.utterance_id,
                    row.noise_type,
                    format_value(row.snr_db),
                    *(
                        format_value(getattr(report, name) if report else None)
                        for name in ("pesq", "csig", "cbak", "covl", "ssnr", "llr", "wss")
                    ),
                    row.status,
                ]
            )


def write_breakdown_csv(evaluation: CorpusEvaluation, path: str | Path) -> None:
    """Means keyed by (noise_type, snr_db), then by noise_type alone (snr_db empty)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = ("pesq", "csig", "cbak", "covl", "ssnr", "llr", "wss")
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("noise_type", "snr_db", *names, "n_utterances"))
        for (noise_type, snr_db), report in evaluation.by_condition.items():
            writer.writerow(
                [noise_type, format_value(snr_db)]
                + [format_value(getattr(report, name)) for name in names]
                + [report.n_utterances]
            )
        for noise_type, report in evaluation.by_noise_type.items():
            writer.writerow(
                [noise_type, ""]
                + [format_value(getattr(report, name)) for name in names]
                + [report.n_utterances]
            )
