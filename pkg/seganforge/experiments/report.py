"""CSV tables and SVG line charts for experiment aggregates"""

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from seganforge.experiments.aggregate import write_aggregates_csv  # noqa: E402
from seganforge.models.schemas import METRIC_NAMES, AggregateRow, Baseline, MetricsReport  # noqa: E402
from seganforge.utils.logging import get_logger  # noqa: E402

logger = get_logger(__name__)

AGGREGATES_CSV = "aggregates.csv"
BASELINES_CSV = "baselines.csv"
BASELINE_COLUMNS = ("baseline", "noise_type", "metric", "value")
NO_BASELINES = "none"

MODE_STYLES = {
    "preeng": {"color": "tab:blue", "marker": "o"},
    "scratch": {"color": "tab:orange", "marker": "s"},
}
BASELINE_STYLES = {
    "unadapted": {"color": "tab:green", "linestyle": "--", "label": "without fine-tuning"},
    "noisy": {"color": "black", "linestyle": "-.", "label": "noisy input"},
}
AXIS_LABELS = {
    "exp1": "training data duration (s)",
    "exp2": "number of training noise types",
}
SVG_RC = {"svg.hashsalt": "seganforge", "svg.fonttype": "path"}


@dataclass
class ChartSummary:
    path: Path
    metric: str
    series: dict[str, int] = field(default_factory=dict)
    baselines: list[str] = field(default_factory=list)


def write_baselines_csv(baselines: list[Baseline], path: str | Path) -> None:
    """One row per (baseline, noise type, metric); a single ``none`` row marks absence"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(BASELINE_COLUMNS)
        if not baselines:
            writer.writerow([NO_BASELINES, "", "", ""])
            return
        for baseline in baselines:
            reports = {"": baseline.metrics, **baseline.by_noise_type}
            for noise_type, report in reports.items():
                for metric in METRIC_NAMES:
                    value = report.metric(metric)
                    if value is not None:
                        writer.writerow([baseline.name, noise_type, metric, f"{value:.6f}"])


def read_baselines_csv(path: str | Path) -> list[Baseline]:
    path = Path(path)
    if not path.exists():
        return []
    values: dict[str, dict[str, dict[str, float]]] = defaultdict(lambda: defaultdict(dict))
    with path.open("r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            if row["baseline"] == NO_BASELINES:
                continue
            values[row["baseline"]][row["noise_type"]][row["metric"]] = float(row["value"])
    baselines = []
    for name in sorted(values):
        reports = {key: MetricsReport(**metrics) for key, metrics in values[name].items()}
        overall = reports.pop("", None)
        if overall is not None:
            baselines.append(Baseline(name=name, metrics=overall, by_noise_type=reports))
    return baselines


def _save(fig, path: Path, title: str) -> None:
    fig.savefig(
        path,
        format="svg",
        metadata={"Title": title, "Description": f"source_csv={AGGREGATES_CSV}", "Date": None},
    )
    plt.close(fig)


def _series(rows: list[AggregateRow]) -> tuple[list[float], list[float], list[float]]:
    rows = sorted(rows, key=lambda row: row.axis)
    return [r.axis for r in rows], [r.mean for r in rows], [r.std for r in rows]


def _finish_axes(ax, experiment: str, metric: str) -> None:
    if experiment == "exp1":
        ax.set_xscale("log")
    ax.set_xlabel(AXIS_LABELS.get(experiment, "axis"))
    ax.set_ylabel(metric.upper())
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)


def _plot_metric(
    rows: list[AggregateRow], baselines: list[Baseline], metric: str, experiment: str, out_dir: Path
) -> ChartSummary:
    path = out_dir / f"{experiment}_{metric}.svg"
    summary = ChartSummary(path=path, metric=metric)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    by_mode: dict[str, list[AggregateRow]] = defaultdict(list)
    for row in rows:
        by_mode[row.init_mode].append(row)
    for mode in sorted(by_mode):
        x, mean, std = _series(by_mode[mode])
        ax.errorbar(x, mean, yerr=std, capsize=3, label=mode, **MODE_STYLES.get(mode, {}))
        summary.series[mode] = len(x)
    for baseline in baselines:
        value = baseline.metrics.metric(metric)
        if value is None:
            continue
        ax.axhline(value, **BASELINE_STYLES[baseline.name])
        summary.baselines.append(baseline.name)
    ax.set_title(f"{experiment}: {metric.upper()}")
    _finish_axes(ax, experiment, metric)
    _save(fig, path, f"{experiment} {metric}")
    return summary


def _plot_noise_types(
    rows: list[AggregateRow], metric: str, mode: str, experiment: str, out_dir: Path
) -> ChartSummary:
    path = out_dir / f"{experiment}_{metric}_{mode}_by_noise.svg"
    summary = ChartSummary(path=path, metric=metric)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    by_type: dict[str, list[AggregateRow]] = defaultdict(list)
    for row in rows:
        by_type[row.noise_type or ""].append(row)
    for noise_type in sorted(by_type):
        x, mean, std = _series(by_type[noise_type])
        ax.errorbar(x, mean, yerr=std, capsize=2, marker=".", label=noise_type)
        summary.series[noise_type] = len(x)
    ax.set_title(f"{experiment}: {metric.upper()} per test noise type ({mode})")
    _finish_axes(ax, experiment, metric)
    _save(fig, path, f"{experiment} {metric} {mode} by noise type")
    return summary


def emit_report(
    aggregates: list[AggregateRow],
    baselines: list[Baseline],
    out_dir: str | Path,
    *,
    experiment: str = "exp1",
) -> list[ChartSummary]:
    """
    Write ``aggregates.csv``, ``baselines.csv`` and the SVG charts.

    One chart per metric with a mean +/- std curve per init mode and horizontal baseline lines,
    plus, when per-noise-type rows are present, one chart per (metric, init mode) with a curve
    per test noise type. Exp 1 charts use a logarithmic duration axis.

    Returns:
        list[ChartSummary]: Written charts with their point counts

    Raises:
        ValueError: ``aggregates`` is empty
    """
    if not aggregates:
        raise ValueError("Cannot emit a report from empty aggregates")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_aggregates_csv(aggregates, out_dir / AGGREGATES_CSV)
    write_baselines_csv(baselines, out_dir / BASELINES_CSV)

    overall: dict[str, list[AggregateRow]] = defaultdict(list)
    per_type: dict[tuple[str, str], list[AggregateRow]] = defaultdict(list)
    for row in aggregates:
        if row.noise_type is None:
            overall[row.metric].append(row)
        else:
            per_type[(row.metric, row.init_mode)].append(row)

    charts: list[ChartSummary] = []
    with plt.rc_context(SVG_RC):
        for metric in METRIC_NAMES:
            if metric in overall:
                charts.append(_plot_metric(overall[metric], baselines, metric, experiment, out_dir))
        for metric in METRIC_NAMES:
            for mode in sorted({mode for m, mode in per_type if m == metric}):
                charts.append(_plot_noise_types(per_type[(metric, mode)], metric, mode, experiment, out_dir))
    logger.info(
        f"Report written | out_dir={out_dir} | charts={len(charts)} | baselines={len(baselines)}"
    )
    return charts
