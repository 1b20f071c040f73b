"""Objective speech-quality metrics"""

from seganforge.metrics.composite import composite_measures
from seganforge.metrics.evaluation import (
    CorpusEvaluation,
    EvaluationPair,
    evaluate_corpus,
    evaluate_utterance,
    mean_report,
    write_breakdown_csv,
    write_metrics_csv,
)
from seganforge.metrics.lpc import autocorrelation, levinson_durbin, llr, llr_frames, lpc_coefficients
from seganforge.metrics.pesq import PesqAdapter, parse_pesq_output, pesq_external
from seganforge.metrics.snr import segmental_snr
from seganforge.metrics.wss import wss, wss_frames

__all__ = [
    "CorpusEvaluation",
    "EvaluationPair",
    "PesqAdapter",
    "autocorrelation",
    "composite_measures",
    "evaluate_corpus",
    "evaluate_utterance",
    "levinson_durbin",
    "llr",
    "llr_frames",
    "lpc_coefficients",
    "mean_report",
    "parse_pesq_output",
    "pesq_external",
    "segmental_snr",
    "write_breakdown_csv",
    "write_metrics_csv",
    "wss",
    "wss_frames",
]
