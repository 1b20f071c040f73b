import csv
import json
from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError

from seganforge.audio.clip import AudioClip
from seganforge.audio.manifest import manifest_fingerprint, read_manifest
from seganforge.audio.wav import write_wav
from seganforge.exceptions import (
    ExperimentAbortedError,
    InsufficientCorpusError,
    ManifestChangedError,
    PlanError,
)
from seganforge.experiments import (
    aggregate,
    assign_conditions,
    build_corpus,
    condition_grid,
    emit_report,
    enumerate_runs,
    exp1_preset,
    exp2_preset,
    generate_synthetic_corpus,
    read_aggregates_csv,
    read_baselines_csv,
    read_results_csv,
    run_exp1,
    run_exp2,
    runs_per_mode,
    sample_noise_types,
    sample_training_subset,
    synth_noise,
    write_aggregates_csv,
)
from seganforge.experiments.runner import (
    PLAN_RECORD,
    PLANNED_RUNS_CSV,
    RESULTS_CSV,
    RunJob,
    execute_run,
    verify_test_manifest,
)
from seganforge.models.schemas import (
    Baseline,
    Exp1Plan,
    Exp2Plan,
    ManifestRecord,
    MetricsReport,
    RunResult,
)


def _small_source(root, seed=0):
    return generate_synthetic_corpus(
        root,
        n_speakers=2,
        utterances_per_speaker=2,
        utterance_s=0.25,
        noise_s=0.5,
        train_noise_types=("white",),
        test_noise_types=("violet",),
        seed=seed,
    )


def _record(utterance_id: str, duration_s: float, noise_type: str = "white") -> ManifestRecord:
    return ManifestRecord(
        utterance_id=utterance_id,
        speaker_id="spk00",
        language="",
        clean_path=f"clean/{utterance_id}.wav",
        noise_type=noise_type,
        snr_db=5.0,
        mixed_path=f"train/{utterance_id}.wav",
        duration_s=duration_s,
    )


def _result(axis: float, mode: str, ssnr: float, repeat: int = 0, **changes) -> RunResult:
    report = MetricsReport(ssnr=ssnr, llr=0.5, wss=20.0)
    fields = {
        "run_id": f"exp1-d{axis:g}-r{repeat:02d}-{mode}",
        "experiment": "exp1",
        "axis": axis,
        "repeat": repeat,
        "init_mode": mode,
        "seed": repeat,
        "metrics": report,
        "by_noise_type": {"violet": report},
    }
    return RunResult(**{**fields, **changes})


def test_synthetic_corpus_is_seed_deterministic(tmp_path):
    first = _small_source(tmp_path / "a", seed=4)
    _small_source(tmp_path / "b", seed=4)
    _small_source(tmp_path / "c", seed=5)

    names = sorted(path.relative_to(tmp_path / "a") for path in (tmp_path / "a").rglob("*.wav"))
    assert len(names) == 2 * 2 + 2
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / names[0]).read_bytes() != (tmp_path / "c" / names[0]).read_bytes()
    assert first.speakers == ["spk00", "spk01"]
    assert (first.noise_dir / "test" / "violet.wav").is_file()


def test_synthetic_noise_is_rms_normalized():
    clip = synth_noise("white", 1.0, seed=0)
    assert float(np.sqrt(np.mean(clip.samples**2))) == pytest.approx(0.1, rel=1e-3)
    with pytest.raises(ValueError, match="Unknown synthetic noise type"):
        synth_noise("thunder", 1.0, seed=0)


def test_round_robin_assignment_is_balanced():
    grid = condition_grid(["pink", "white"], [15.0, 5.0])
    counts = Counter(assign_conditions(10, grid))

    assert sorted(counts.values()) == [2, 2, 3, 3]
    with pytest.raises(ValueError):
        assign_conditions(3, [])


def test_tiny_corpus_splits_speakers_and_noises(tiny_corpus):
    train, test = tiny_corpus.train_records, tiny_corpus.test_records

    assert len(train) == 6 and len(test) == 3
    assert {record.speaker_id for record in train} == {"spk00", "spk01"}
    assert {record.speaker_id for record in test} == {"spk02"}
    assert {record.noise_type for record in train} <= {"pink", "white"}
    assert {(record.noise_type, record.snr_db) for record in test} == {("violet", 7.5)}
    assert {record.snr_db for record in train} <= {15.0, 10.0, 5.0, 0.0}

    loaded = read_manifest(tiny_corpus.train_manifest)
    assert [record.utterance_id for record in loaded] == [record.utterance_id for record in train]
    assert all(record.duration_s == pytest.approx(0.5) for record in loaded)


def test_overlapping_noise_types_need_permission(tmp_path):
    source = _small_source(tmp_path / "src")
    kwargs = {"train_noise_types": ["white"], "test_noise_types": ["white"], "test_speakers": ["spk01"]}

    with pytest.raises(ValueError, match="overlap"):
        build_corpus(source.clean_dir, source.noise_dir, tmp_path / "out", **kwargs)

    build = build_corpus(
        source.clean_dir, source.noise_dir, tmp_path / "out", allow_overlap=True, **kwargs
    )
    assert {record.noise_type for record in build.test_records} == {"white"}


def test_test_grid_needs_held_out_speakers(tmp_path):
    source = _small_source(tmp_path / "src")

    with pytest.raises(ValueError, match="held-out speakers"):
        build_corpus(source.clean_dir, source.noise_dir, tmp_path / "default")
    with pytest.raises(ValueError, match="spk07"):
        build_corpus(source.clean_dir, source.noise_dir, tmp_path / "unknown", test_speakers=["spk07"])

    build = build_corpus(source.clean_dir, source.noise_dir, tmp_path / "out", test_speakers=["spk01"])
    train_ids = {record.utterance_id for record in build.train_records}
    test_ids = {record.utterance_id for record in build.test_records}
    assert train_ids and test_ids
    assert not train_ids & test_ids
    assert {record.speaker_id for record in build.test_records} == {"spk01"}


def test_train_only_build_needs_no_held_out_speakers(tmp_path):
    source = _small_source(tmp_path / "src")

    build = build_corpus(source.clean_dir, source.noise_dir, tmp_path / "out", test_noise_types=[])

    assert build.test_manifest is None
    assert {record.speaker_id for record in build.train_records} == {"spk00", "spk01"}


def test_unknown_noise_type_is_rejected(tmp_path):
    source = _small_source(tmp_path / "src")
    with pytest.raises(ValueError, match="without a WAV"):
        build_corpus(source.clean_dir, source.noise_dir, tmp_path / "out", train_noise_types=["hum50"])


def test_silent_utterances_are_skipped(tmp_path):
    source = _small_source(tmp_path / "src")
    silent = source.clean_dir / "spk00_999.wav"
    write_wav(AudioClip(samples=np.zeros(4000)), silent)

    build = build_corpus(source.clean_dir, source.noise_dir, tmp_path / "out", test_speakers=["spk01"])

    assert build.skipped == [str(silent)]
    assert "spk00_999" not in {record.utterance_id for record in build.train_records}


def test_subset_reaches_target_duration():
    records = [_record(f"u{i}", d) for i, d in enumerate([1.0, 2.0, 3.0, 4.0])]

    subset = sample_training_subset(records, 5.0, seed=9)

    assert sum(record.duration_s for record in subset) >= 5.0
    assert sum(record.duration_s for record in subset[:-1]) < 5.0
    assert subset == sample_training_subset(records, 5.0, seed=9)
    assert len(sample_training_subset(records, 10.0, seed=1)) == 4


def test_subset_larger_than_corpus_fails():
    records = [_record("u0", 1.0), _record("u1", 2.0)]
    with pytest.raises(InsufficientCorpusError):
        sample_training_subset(records, 3.5, seed=0)
    with pytest.raises(ValueError):
        sample_training_subset(records, 0.0, seed=0)


def test_noise_type_draws():
    pool = ["a", "b", "c", "d", "e"]
    picks = sample_noise_types(pool, 3, seed=2)

    assert len(set(picks)) == 3 and set(picks) <= set(pool)
    assert picks == sample_noise_types(pool, 3, seed=2)
    with pytest.raises(ValueError):
        sample_noise_types(pool, 6, seed=2)


def test_full_scale_plans_enumerate_every_run():
    exp1 = enumerate_runs(exp1_preset("full"))
    exp2 = enumerate_runs(exp2_preset("full"))

    assert runs_per_mode(exp1) == {"preeng": 60, "scratch": 60}
    assert runs_per_mode(exp2) == {"preeng": 50, "scratch": 50}
    assert len({run.seed for run in exp1 + exp2}) == len(exp1) + len(exp2)
    assert exp1[0].run_id == "exp1-d24-r00-preeng"


def test_paired_runs_share_training_data_only():
    runs = enumerate_runs(exp1_preset("desk"))
    by_cell: dict[tuple[float, int], dict[str, tuple[int, int]]] = {}
    for run in runs:
        by_cell.setdefault((run.axis, run.repeat), {})[run.init_mode] = (run.seed, run.data_seed)

    for cell in by_cell.values():
        assert cell["preeng"][1] == cell["scratch"][1]
        assert cell["preeng"][0] != cell["scratch"][0]


def test_run_seeds_ignore_mode_order_and_follow_master_seed():
    forward = Exp1Plan(durations_s=[24.0], repeats=[2], init_modes=["preeng", "scratch"])
    backward = forward.model_copy(update={"init_modes": ["scratch", "preeng"]})
    reseeded = forward.model_copy(update={"master_seed": 1})

    def seeds(plan):
        return {run.run_id: run.seed for run in enumerate_runs(plan)}

    assert seeds(forward) == seeds(backward)
    assert set(seeds(forward).values()).isdisjoint(seeds(reseeded).values())


def test_invalid_plans_are_rejected():
    with pytest.raises(PlanError):
        exp1_preset("huge")
    with pytest.raises(PlanError, match="Duplicate axis"):
        enumerate_runs(Exp1Plan(durations_s=[24.0, 24.0], repeats=[1, 1]))
    with pytest.raises(ValidationError):
        Exp1Plan(durations_s=[24.0, 60.0], repeats=[1])
    with pytest.raises(ValidationError):
        Exp2Plan(noise_counts=[0, 1])


def test_aggregate_mean_and_unbiased_std():
    results = [
        _result(24.0, "preeng", 1.0, repeat=0),
        _result(24.0, "preeng", 2.0, repeat=1),
        _result(24.0, "preeng", 3.0, repeat=2),
        _result(24.0, "preeng", 99.0, repeat=3, status="failed", metrics=None, by_noise_type={}),
        _result(60.0, "scratch", 4.0),
    ]

    rows = aggregate(results)

    ssnr = {(row.axis, row.init_mode): row for row in rows if row.metric == "ssnr"}
    assert ssnr[(24.0, "preeng")].mean == pytest.approx(2.0)
    assert ssnr[(24.0, "preeng")].std == pytest.approx(1.0)
    assert ssnr[(24.0, "preeng")].n_runs == 3
    assert ssnr[(60.0, "scratch")].std == 0.0
    assert not any(row.metric == "pesq" for row in rows)
    assert all(row.noise_type is None for row in rows)
    assert aggregate(list(reversed(results))) == rows

    per_type = aggregate(results, per_noise_type=True)
    assert {row.noise_type for row in per_type} == {"violet"}


def test_aggregates_csv_round_trip(tmp_path):
    rows = aggregate([_result(24.0, "preeng", 2.0), _result(24.0, "preeng", 2.0, repeat=1)])

    write_aggregates_csv(rows, tmp_path / "aggregates.csv")

    assert read_aggregates_csv(tmp_path / "aggregates.csv") == rows


def test_report_writes_deterministic_svg_charts(tmp_path):
    results = [
        _result(24.0, "preeng", 1.0),
        _result(60.0, "preeng", 2.0),
        _result(24.0, "scratch", 0.5),
    ]
    rows = aggregate(results) + aggregate(results, per_noise_type=True)
    baselines = [Baseline(name="noisy", metrics=MetricsReport(ssnr=-1.0, llr=0.9, wss=40.0))]

    charts = emit_report(rows, baselines, tmp_path / "a")
    emit_report(rows, baselines, tmp_path / "b")

    names = [chart.path.name for chart in charts]
    assert "exp1_ssnr.svg" in names
    assert "exp1_ssnr_preeng_by_noise.svg" in names
    ssnr = next(chart for chart in charts if chart.path.name == "exp1_ssnr.svg")
    assert ssnr.series == {"preeng": 2, "scratch": 1}
    assert ssnr.baselines == ["noisy"]
    for name in names:
        content = (tmp_path / "a" / name).read_bytes()
        assert b"<svg" in content
        assert content == (tmp_path / "b" / name).read_bytes()

    restored = read_baselines_csv(tmp_path / "a" / "baselines.csv")
    assert [baseline.name for baseline in restored] == ["noisy"]
    assert restored[0].metrics.ssnr == pytest.approx(-1.0)


def test_report_needs_aggregates(tmp_path):
    with pytest.raises(ValueError):
        emit_report([], [], tmp_path)


def test_dry_run_only_lists_runs(tmp_path):
    plan = Exp1Plan(durations_s=[1.0, 2.0], repeats=[2, 1], dry_run=True)

    outcome = run_exp1(plan, tmp_path, jobs=1)

    assert len(outcome.planned) == 6
    assert outcome.results == []
    with (tmp_path / PLANNED_RUNS_CSV).open(encoding="utf-8") as handle:
        assert len(list(csv.reader(handle))) == 7
    assert not (tmp_path / RESULTS_CSV).exists()


def test_plan_without_manifests_is_rejected(tmp_path):
    plan = Exp1Plan(durations_s=[1.0], repeats=[1], init_modes=["scratch"], profile="tiny")
    with pytest.raises(PlanError, match="train_manifest"):
        run_exp1(plan, tmp_path, jobs=1)


def test_preeng_plan_needs_base_checkpoint(tmp_path, tiny_corpus):
    plan = Exp1Plan(
        durations_s=[1.0],
        repeats=[1],
        profile="tiny",
        train_manifest=str(tiny_corpus.train_manifest),
        test_manifest=str(tiny_corpus.test_manifest),
    )
    with pytest.raises(PlanError, match="base_checkpoint"):
        run_exp1(plan, tmp_path, jobs=1)


def test_exp2_noise_count_beyond_pool_is_rejected(tmp_path, tiny_corpus):
    plan = Exp2Plan(
        noise_counts=[3],
        runs_per_count=1,
        fixed_duration_s=1.0,
        init_modes=["scratch"],
        profile="tiny",
        train_manifest=str(tiny_corpus.train_manifest),
        test_manifest=str(tiny_corpus.test_manifest),
    )
    with pytest.raises(PlanError, match="noise count"):
        run_exp2(plan, tmp_path, jobs=1)


def _failing_plan(tiny_corpus, **changes) -> Exp1Plan:
    # the tiny corpus holds 3 s of training audio
    fields = {
        "durations_s": [100.0],
        "repeats": [1],
        "init_modes": ["scratch"],
        "profile": "tiny",
        "train_manifest": str(tiny_corpus.train_manifest),
        "test_manifest": str(tiny_corpus.test_manifest),
    }
    return Exp1Plan(**{**fields, **changes})


def test_failed_runs_abort_the_plan(tmp_path, tiny_corpus):
    with pytest.raises(ExperimentAbortedError):
        run_exp1(_failing_plan(tiny_corpus), tmp_path, jobs=1)

    (row,) = read_results_csv(tmp_path / RESULTS_CSV)
    assert row.status == "failed"
    assert row.failure_code == "insufficient_corpus"


def test_tolerated_failures_are_recorded(tmp_path, tiny_corpus):
    outcome = run_exp1(_failing_plan(tiny_corpus, max_failure_fraction=1.0), tmp_path, jobs=1)

    assert [result.failure_code for result in outcome.failures] == ["insufficient_corpus"]
    assert [baseline.name for baseline in outcome.baselines] == ["noisy"]
    record = json.loads((tmp_path / PLAN_RECORD).read_text(encoding="utf-8"))
    assert record["test_manifest_sha256"] == manifest_fingerprint(tiny_corpus.test_manifest)


def test_verify_test_manifest_detects_edits(tmp_path, tiny_corpus):
    manifest = tmp_path / "test.tsv"
    manifest.write_bytes(tiny_corpus.test_manifest.read_bytes())
    frozen = manifest_fingerprint(manifest)

    verify_test_manifest(manifest, frozen)
    verify_test_manifest(manifest, None)

    lines = manifest.read_text(encoding="utf-8").splitlines(keepends=True)
    manifest.write_text("".join(lines[:-1]), encoding="utf-8")
    with pytest.raises(ManifestChangedError) as info:
        verify_test_manifest(manifest, frozen)
    assert info.value.code == "manifest_changed"


def test_run_against_changed_manifest_fails_before_training(tmp_path, tiny_corpus):
    plan = _failing_plan(tiny_corpus, durations_s=[1.0])
    (run,) = enumerate_runs(plan)
    job = RunJob(
        run=run,
        train_manifest=plan.train_manifest,
        test_manifest=plan.test_manifest,
        profile=plan.profile,
        train_overrides={},
        base_checkpoint=None,
        duration_s=1.0,
        noise_count=None,
        work_dir=str(tmp_path / "runs"),
        test_fingerprint="0" * 64,
    )

    result = execute_run(job)

    assert result.status == "failed"
    assert result.failure_code == "manifest_changed"
    assert not (tmp_path / "runs").exists()


@pytest.mark.slow
def test_small_exp1_trains_and_evaluates(tmp_path, tiny_corpus):
    plan = Exp1Plan(
        durations_s=[1.0],
        repeats=[1],
        init_modes=["scratch"],
        profile="tiny",
        train={"epochs": 1, "batch_size": 16},
        train_manifest=str(tiny_corpus.train_manifest),
        test_manifest=str(tiny_corpus.test_manifest),
    )

    outcome = run_exp1(plan, tmp_path, jobs=1)

    (result,) = outcome.results
    assert result.status == "ok"
    assert result.metrics.pesq is None
    assert set(result.by_noise_type) == {"violet"}
    assert len(result.subset) == 2
    (row,) = read_results_csv(tmp_path / RESULTS_CSV)
    assert row.metrics.ssnr == pytest.approx(result.metrics.ssnr, abs=1e-6)
    assert row.wall_s == 0.0
    assert (tmp_path / "runs" / result.run_id / "final.sgck").is_file()


@pytest.mark.slow
def test_small_exp2_draws_training_noise_types(tmp_path, tiny_corpus):
    plan = Exp2Plan(
        noise_counts=[1],
        runs_per_count=1,
        fixed_duration_s=0.5,
        init_modes=["scratch"],
        profile="tiny",
        train={"epochs": 1},
        train_manifest=str(tiny_corpus.train_manifest),
        test_manifest=str(tiny_corpus.test_manifest),
    )

    (result,) = run_exp2(plan, tmp_path, jobs=1).results

    assert result.status == "ok"
    assert len(result.noise_types) == 1 and result.noise_types[0] in {"pink", "white"}
