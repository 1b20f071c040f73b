"""Experiment orchestration: plan enumeration, per-run train/evaluate jobs, baselines"""

import csv
import json
import time
from collections.abc import Callable
from concurrent.futures import Future, ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from seganforge.audio.clip import AudioClip
from seganforge.audio.manifest import load_record_clips, manifest_fingerprint, read_manifest
from seganforge.config import settings
from seganforge.exceptions import (
    ExperimentAbortedError,
    ManifestChangedError,
    PlanError,
    SeganForgeError,
)
from seganforge.experiments.plans import enumerate_runs, write_planned_runs
from seganforge.experiments.report import write_baselines_csv
from seganforge.experiments.sampling import sample_noise_types, sample_training_subset
from seganforge.metrics.evaluation import CorpusEvaluation, EvaluationPair, evaluate_corpus, format_value
from seganforge.metrics.pesq import PesqAdapter
from seganforge.models.schemas import (
    METRIC_NAMES,
    Baseline,
    Exp1Plan,
    Exp2Plan,
    ManifestRecord,
    MetricsReport,
    PlannedRun,
    RunResult,
    TrainConfig,
)
from seganforge.segan.checkpoint import ModelCheckpoint, load_checkpoint
from seganforge.segan.data import ChunkPair, make_training_pairs
from seganforge.segan.enhance import enhance, load_generator
from seganforge.segan.profiles import generator_config
from seganforge.segan.trainer import train_from_config
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

RESULT_COLUMNS = ("run_id", "axis", "repeat", "mode", "seed", *METRIC_NAMES, "wall_s", "status", "failure_code")
RESULTS_CSV = "results.csv"
TIMINGS_CSV = "timings.csv"
PLANNED_RUNS_CSV = "planned_runs.csv"
RUN_PROVENANCE = "run_provenance.jsonl"
PLAN_RECORD = "plan_record.json"
NOISE_SEED_KEY = 0
SUBSET_SEED_KEY = 1

TestPairs = list[tuple[AudioClip, AudioClip]]


@dataclass
class RunJob:
    """Everything one worker needs to execute a planned run"""

    run: PlannedRun
    train_manifest: str
    test_manifest: str
    profile: str
    train_overrides: dict
    base_checkpoint: str | None
    duration_s: float
    noise_count: int | None
    work_dir: str
    adapter: PesqAdapter | None = None
    test_fingerprint: str | None = None


@dataclass
class ExperimentOutcome:
    planned: list[PlannedRun]
    results: list[RunResult] = field(default_factory=list)
    baselines: list[Baseline] = field(default_factory=list)
    test_fingerprint: str | None = None

    @property
    def failures(self) -> list[RunResult]:
        return [result for result in self.results if result.status == "failed"]


def derived_seed(data_seed: int, key: int) -> int:
    return int(np.random.SeedSequence(data_seed, spawn_key=(key,)).generate_state(1)[0])


def training_pairs(records: list[ManifestRecord], cfg: TrainConfig) -> list[ChunkPair]:
    """Load the clean/noisy audio of ``records`` and window it for a model of ``cfg.profile``"""
    clips = [load_record_clips(record) for record in records]
    return make_training_pairs(
        [clean for clean, _ in clips],
        [noisy for _, noisy in clips],
        generator_config(cfg.profile).window_len,
        cfg.train_overlap,
        cfg.preemph,
    )


def load_test_pairs(test_manifest: str | Path) -> TestPairs:
    return [load_record_clips(record) for record in read_manifest(test_manifest)]


def evaluate_checkpoint(
    ckpt: ModelCheckpoint, test_pairs: TestPairs, seed: int, adapter: PesqAdapter | None = None
) -> CorpusEvaluation:
    """Enhance every noisy test clip with ``ckpt`` and score it against the clean reference."""
    generator = load_generator(ckpt)
    pairs = [
        EvaluationPair(clean=clean, degraded=enhance(noisy, ckpt, seed, generator=generator))
        for clean, noisy in test_pairs
    ]
    return evaluate_corpus(pairs, adapter=adapter)


def compute_baselines(
    test_pairs: TestPairs, base: ModelCheckpoint | None, adapter: PesqAdapter | None = None
) -> list[Baseline]:
    """Noisy-input metrics and, with a base checkpoint, metrics of the unadapted base model"""
    noisy = evaluate_corpus(
        [EvaluationPair(clean=clean, degraded=noisy) for clean, noisy in test_pairs], adapter=adapter
    )
    baselines = [Baseline(name="noisy", metrics=noisy.report, by_noise_type=noisy.by_noise_type)]
    if base is not None:
        unadapted = evaluate_checkpoint(base, test_pairs, seed=0, adapter=adapter)
        baselines.append(
            Baseline(name="unadapted", metrics=unadapted.report, by_noise_type=unadapted.by_noise_type)
        )
    return baselines


def verify_test_manifest(test_manifest: str | Path, expected_sha256: str | None) -> None:
    """
    Check the test manifest still hashes to the value frozen at plan start.

    Raises:
        ManifestChangedError: The manifest bytes changed since the plan recorded them
    """
    if expected_sha256 is None:
        return
    actual = manifest_fingerprint(test_manifest)
    if actual != expected_sha256:
        raise ManifestChangedError(
            f"Test manifest changed during the plan | path={test_manifest} | "
            f"expected={expected_sha256[:12]} | actual={actual[:12]}"
        )


def execute_run(job: RunJob) -> RunResult:
    """
    Sample training data, train or fine-tune, then evaluate on the fixed test set.

    Domain failures are returned as a ``failed`` row carrying the error code.
    """
    run = job.run
    started = time.perf_counter()
    result = RunResult(**run.model_dump())
    try:
        verify_test_manifest(job.test_manifest, job.test_fingerprint)
        records = read_manifest(job.train_manifest)
        if job.noise_count is not None:
            pool = sorted({record.noise_type for record in records})
            result.noise_types = sample_noise_types(
                pool, job.noise_count, derived_seed(run.data_seed, NOISE_SEED_KEY)
            )
            chosen = set(result.noise_types)
            records = [record for record in records if record.noise_type in chosen]
        subset = sample_training_subset(
            records, job.duration_s, derived_seed(run.data_seed, SUBSET_SEED_KEY)
        )
        result.subset = [record.utterance_id for record in subset]

        cfg = TrainConfig.model_validate(
            {
                **job.train_overrides,
                "profile": job.profile,
                "seed": run.seed,
                "init_mode": run.init_mode,
                "base_checkpoint": job.base_checkpoint if run.init_mode == "preeng" else None,
            }
        )
        training = train_from_config(training_pairs(subset, cfg), cfg, Path(job.work_dir) / run.run_id)
        evaluation = evaluate_checkpoint(
            training.checkpoint, load_test_pairs(job.test_manifest), run.seed, job.adapter
        )
        result.metrics = evaluation.report
        result.by_noise_type = evaluation.by_noise_type
    except (SeganForgeError, ValueError, OSError) as exc:
        code = exc.code if isinstance(exc, SeganForgeError) else type(exc).__name__
        logger.error(f"Run failed | run_id={run.run_id} | code={code} | error={exc}", exc_info=True)
        result.status = "failed"
        result.failure_code = code
    result.wall_s = time.perf_counter() - started
    logger.info(
        f"Run finished | run_id={run.run_id} | status={result.status} | wall_s={result.wall_s:.1f}"
    )
    return result


def write_results_csv(results: list[RunResult], path: str | Path, *, record_wall_time: bool) -> None:
    """Per-run rows; ``wall_s`` stays empty unless requested so reruns are byte-identical"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for result in results:
            metrics = result.metrics
            writer.writerow(
                [
                    result.run_id,
                    f"{result.axis:g}",
                    result.repeat,
                    result.init_mode,
                    result.seed,
                    *(format_value(metrics.metric(name) if metrics else None) for name in METRIC_NAMES),
                    f"{result.wall_s:.3f}" if record_wall_time else "",
                    result.status,
                    result.failure_code or "",
                ]
            )


def read_results_csv(path: str | Path) -> list[RunResult]:
    """Rebuild result rows (overall metrics only) from ``results.csv``"""
    results = []
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            metrics = None
            if row["status"] == "ok":
                values = {name: float(row[name]) for name in METRIC_NAMES if row[name] != ""}
                metrics = MetricsReport(**values)
            results.append(
                RunResult(
                    run_id=row["run_id"],
                    experiment=row["run_id"].split("-", 1)[0],
                    axis=float(row["axis"]),
                    repeat=int(row["repeat"]),
                    init_mode=row["mode"],
                    seed=int(row["seed"]),
                    status=row["status"],
                    failure_code=row["failure_code"] or None,
                    metrics=metrics,
                    wall_s=float(row["wall_s"]) if row["wall_s"] else 0.0,
                )
            )
    return results


def _write_run_artifacts(results: list[RunResult], out_dir: Path, record_wall_time: bool) -> None:
    write_results_csv(results, out_dir / RESULTS_CSV, record_wall_time=record_wall_time)
    with (out_dir / TIMINGS_CSV).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("run_id", "wall_s", "status"))
        for result in results:
            writer.writerow([result.run_id, f"{result.wall_s:.3f}", result.status])
    with (out_dir / RUN_PROVENANCE).open("w", encoding="utf-8") as handle:
        for result in results:
            entry = {
                "run_id": result.run_id,
                "seed": result.seed,
                "data_seed": result.data_seed,
                "status": result.status,
                "failure_code": result.failure_code,
                "noise_types": result.noise_types,
                "subset": result.subset,
            }
            handle.write(json.dumps(entry, sort_keys=True) + "\n")


def _execute(
    jobs: list[RunJob], n_workers: int, on_result: Callable[[RunResult], bool]
) -> list[RunResult]:
    """Run jobs in plan order; ``on_result`` returns False to stop scheduling further work."""
    results: list[RunResult] = []
    if n_workers <= 1:
        for job in jobs:
            result = execute_run(job)
            results.append(result)
            if not on_result(result):
                break
        return results
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        futures: list[Future] = [pool.submit(execute_run, job) for job in jobs]
        for future in futures:
            result = future.result()
            results.append(result)
            if not on_result(result):
                pool.shutdown(wait=True, cancel_futures=True)
                break
    return results


def run_experiment(
    plan: Exp1Plan | Exp2Plan,
    out_dir: str | Path,
    *,
    jobs: int | None = None,
    adapter: PesqAdapter | None = None,
) -> ExperimentOutcome:
    """
    Execute every planned run of ``plan`` and write the result tables into ``out_dir``.

    Writes ``planned_runs.csv`` always; unless ``plan.dry_run`` also ``results.csv``,
    ``timings.csv``, ``baselines.csv``, ``run_provenance.jsonl`` and ``plan_record.json`` (with
    the test-manifest SHA-256). Per-run checkpoints go to ``out_dir/runs/<run_id>/``.

    Raises:
        PlanError: Invalid plan inputs (missing manifests or base checkpoint, bad train overrides,
            overlapping noise pools in Exp 2)
        ExperimentAbortedError: More than ``plan.max_failure_fraction`` of the runs failed
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    planned = enumerate_runs(plan)
    write_planned_runs(planned, out_dir / PLANNED_RUNS_CSV)
    logger.info(f"Plan enumerated | plan={plan.name} | runs={len(planned)} | dry_run={plan.dry_run}")
    outcome = ExperimentOutcome(planned=planned)
    if plan.dry_run:
        return outcome

    try:
        TrainConfig.model_validate({**plan.train, "profile": plan.profile})
        generator_config(plan.profile)
    except (ValidationError, ValueError) as exc:
        raise PlanError(f"Invalid training settings in plan {plan.name!r}: {exc}") from exc
    for label, manifest in (("train_manifest", plan.train_manifest), ("test_manifest", plan.test_manifest)):
        if not manifest or not Path(manifest).is_file():
            raise PlanError(f"Plan {label} not found: {manifest!r}")
    base = None
    if "preeng" in plan.init_modes or plan.base_checkpoint:
        if not plan.base_checkpoint:
            raise PlanError("init mode 'preeng' requires plan.base_checkpoint")
        base = load_checkpoint(plan.base_checkpoint)
        if base.generator_config != generator_config(plan.profile):
            raise PlanError(
                f"Base checkpoint window/channels do not match profile {plan.profile!r}"
            )

    is_exp2 = isinstance(plan, Exp2Plan)
    if is_exp2:
        train_types = {record.noise_type for record in read_manifest(plan.train_manifest)}
        test_types = {record.noise_type for record in read_manifest(plan.test_manifest)}
        shared = sorted(train_types & test_types)
        if shared and not plan.allow_noise_overlap:
            raise PlanError(f"Test noise types also used for training: {shared}")
        if shared:
            logger.warning(f"Test noise types overlap the training pool | types={shared}")
        if max(plan.noise_counts) > len(train_types):
            raise PlanError(
                f"noise count {max(plan.noise_counts)} exceeds the {len(train_types)} training noise types"
            )

    outcome.test_fingerprint = manifest_fingerprint(plan.test_manifest)
    test_pairs = load_test_pairs(plan.test_manifest)
    if plan.include_baselines:
        outcome.baselines = compute_baselines(test_pairs, base, adapter)
    (out_dir / PLAN_RECORD).write_text(
        json.dumps(
            {
                "plan": plan.model_dump(mode="json"),
                "test_manifest_sha256": outcome.test_fingerprint,
                "planned_runs": len(planned),
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )

    run_jobs = [
        RunJob(
            run=run,
            train_manifest=plan.train_manifest,
            test_manifest=plan.test_manifest,
            profile=plan.profile,
            train_overrides=dict(plan.train),
            base_checkpoint=plan.base_checkpoint,
            duration_s=plan.fixed_duration_s if is_exp2 else run.axis,
            noise_count=int(run.axis) if is_exp2 else None,
            work_dir=str(out_dir / "runs"),
            adapter=adapter,
            test_fingerprint=outcome.test_fingerprint,
        )
        for run in planned
    ]
    allowed_failures = plan.max_failure_fraction * len(planned)
    failures = 0

    def _keep_going(result: RunResult) -> bool:
        nonlocal failures
        if result.status == "failed":
            failures += 1
        return failures <= allowed_failures

    n_workers = jobs if jobs is not None else settings.jobs
    outcome.results = _execute(run_jobs, n_workers, _keep_going)
    _write_run_artifacts(outcome.results, out_dir, plan.record_wall_time)
    write_baselines_csv(outcome.baselines, out_dir / "baselines.csv")

    if failures > allowed_failures:
        raise ExperimentAbortedError(
            f"Plan {plan.name!r} aborted: {failures} of {len(planned)} runs failed "
            f"(limit {plan.max_failure_fraction:.0%})"
        )
    logger.info(
        f"Plan finished | plan={plan.name} | runs={len(outcome.results)} | failed={failures}"
    )
    return outcome


def run_exp1(plan: Exp1Plan, out_dir: str | Path, **kwargs) -> ExperimentOutcome:
    """Training-duration sweep: one row per (duration, repeat, init mode) plus baselines."""
    return run_experiment(plan, out_dir, **kwargs)


def run_exp2(plan: Exp2Plan, out_dir: str | Path, **kwargs) -> ExperimentOutcome:
    """Noise-type-count sweep at a fixed training duration."""
    return run_experiment(plan, out_dir, **kwargs)
