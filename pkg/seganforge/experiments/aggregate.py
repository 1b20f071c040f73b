"""Per-cell reduction of run results"""

import csv
from collections import defaultdict
from collections.abc import Iterable
from pathlib import Path

import numpy as np

from seganforge.models.schemas import METRIC_NAMES, AggregateRow, MetricsReport, RunResult

AGGREGATE_COLUMNS = ("noise_type", "axis", "mode", "metric", "mean", "std", "n_runs")


def _reduce(values: list[float]) -> tuple[float, float]:
    # sorted so the float reduction does not depend on row order
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    mean = float(np.mean(ordered))
    std = float(np.std(ordered, ddof=1)) if ordered.size > 1 else 0.0
    return mean, std


def aggregate(results: Iterable[RunResult], *, per_noise_type: bool = False) -> list[AggregateRow]:
    """
    Mean and unbiased standard deviation of every metric per (axis, init_mode).

    Failed runs and metrics a run does not carry (PESQ without an adapter) are left out.
    With ``per_noise_type`` the cells are additionally split by test noise type.
    Rows are ordered by noise type, axis, init mode, then metric.
    """
    cells: dict[tuple[str, float, str, str], list[float]] = defaultdict(list)
    for result in results:
        if result.status != "ok" or result.metrics is None:
            continue
        reports: dict[str, MetricsReport] = (
            result.by_noise_type if per_noise_type else {"": result.metrics}
        )
        for noise_type, report in reports.items():
            for metric in METRIC_NAMES:
                value = report.metric(metric)
                if value is not None:
                    cells[(noise_type, result.axis, result.init_mode, metric)].append(value)

    metric_order = {name: index for index, name in enumerate(METRIC_NAMES)}
    rows: list[AggregateRow] = []
    for key in sorted(cells, key=lambda k: (k[0], k[1], k[2], metric_order[k[3]])):
        noise_type, axis, mode, metric = key
        mean, std = _reduce(cells[key])
        rows.append(
            AggregateRow(
                axis=axis,
                init_mode=mode,
                metric=metric,
                mean=mean,
                std=std,
                n_runs=len(cells[key]),
                noise_type=noise_type or None,
            )
        )
    return rows


def write_aggregates_csv(rows: list[AggregateRow], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.noise_type or "",
                    f"{row.axis:g}",
                    row.init_mode,
                    row.metric,
                    f"{row.mean:.6f}",
                    f"{row.std:.6f}",
                    row.n_runs,
                ]
            )


def read_aggregates_csv(path: str | Path) -> list[AggregateRow]:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        return [
            AggregateRow(
                axis=float(row["axis"]),
                init_mode=row["mode"],
                metric=row["metric"],
                mean=float(row["mean"]),
                std=float(row["std"]),
                n_runs=int(row["n_runs"]),
                noise_type=row["noise_type"] or None,
            )
            for row in csv.DictReader(handle)
        ]
