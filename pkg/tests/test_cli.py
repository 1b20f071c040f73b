import csv
import json
import logging

import pytest

from seganforge.config import settings
from seganforge.experiments.runner import PLANNED_RUNS_CSV, write_results_csv
from seganforge.main import EXIT_DOMAIN, EXIT_OK, main
from seganforge.models.schemas import MetricsReport, RunResult


@pytest.fixture(autouse=True)
def _reset_logging():
    """main() rebinds the root handlers to the captured streams"""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        handler.close()
    root.handlers.clear()


@pytest.fixture(autouse=True)
def _no_pesq(monkeypatch):
    monkeypatch.setattr(settings, "PESQ_COMMAND", None)
    monkeypatch.setattr(settings, "JOBS", "1")


def _summary(capsys) -> dict:
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def _error(capsys) -> dict:
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"]


def test_synth_writes_corpus_and_provenance(tmp_path, capsys):
    out = tmp_path / "synth"
    code = main(
        [
            "synth",
            "--out",
            str(out),
            "--set",
            "synth.n_speakers=2",
            "--set",
            "synth.utterances_per_speaker=1",
            "--set",
            "synth.utterance_s=0.25",
            "--set",
            "synth.noise_s=0.25",
        ]
    )

    assert code == EXIT_OK
    summary = _summary(capsys)
    assert summary["speakers"] == 2
    assert len(list((out / "clean").glob("*.wav"))) == 2
    provenance = json.loads((out / "provenance.json").read_text(encoding="utf-8"))
    assert provenance["command"] == "synth"
    assert provenance["seeds"] == {"synth": 0}
    effective = json.loads((out / "effective_config.json").read_text(encoding="utf-8"))
    assert effective["synth"]["n_speakers"] == 2


def test_evaluate_without_pesq_leaves_columns_empty(tmp_path, capsys, tiny_corpus):
    config = tmp_path / "evaluate.toml"
    config.write_text(
        f'[evaluate]\nmanifest = "{tiny_corpus.test_manifest}"\n\n[metrics]\nuse_pesq = true\n',
        encoding="utf-8",
    )

    code = main(["evaluate", "--config", str(config), "--out", str(tmp_path / "scores")])

    assert code == EXIT_OK
    summary = _summary(capsys)
    assert summary["failed"] == 0
    assert summary["report"]["pesq"] is None
    assert set(summary["by_noise_type"]) == {"violet"}
    with (tmp_path / "scores" / "metrics.csv").open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 3
    assert all(row["pesq"] == "" and row["covl"] == "" and row["ssnr"] != "" for row in rows)
    assert (tmp_path / "scores" / "summary.json").is_file()
    assert (tmp_path / "scores" / "breakdown.csv").is_file()


def test_invalid_config_value_exits_with_json_error(tmp_path, capsys):
    code = main(["synth", "--out", str(tmp_path), "--set", "synth.n_speakers=0"])

    assert code == EXIT_DOMAIN
    error = _error(capsys)
    assert error["code"] == "config_invalid"
    assert "synth.n_speakers" in error["message"]


def test_missing_config_file_is_a_config_error(tmp_path, capsys):
    code = main(["synth", "--config", str(tmp_path / "absent.toml"), "--out", str(tmp_path)])

    assert code == EXIT_DOMAIN
    assert _error(capsys)["code"] == "config_invalid"


def test_bad_input_directory_is_invalid_input(tmp_path, capsys):
    code = main(
        [
            "mix",
            "--out",
            str(tmp_path / "mixed"),
            "--set",
            f'mix.clean_dir="{tmp_path / "nowhere"}"',
            "--set",
            f'mix.noise_dir="{tmp_path}"',
        ]
    )

    assert code == EXIT_DOMAIN
    error = _error(capsys)
    assert error["code"] == "invalid_input"
    assert "Clean directory not found" in error["message"]


def test_finetune_requires_a_base_checkpoint(tmp_path, capsys):
    code = main(["finetune", "--out", str(tmp_path), "--set", "data.manifest=train.tsv"])

    assert code == EXIT_DOMAIN
    assert "base_checkpoint" in _error(capsys)["message"]


def test_invalid_environment_stops_before_running(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(settings, "JOBS", "0")

    code = main(["synth", "--out", str(tmp_path / "never")])

    assert code == EXIT_DOMAIN
    assert _error(capsys)["code"] == "config_invalid"
    assert not (tmp_path / "never").exists()


@pytest.mark.parametrize(
    ("argv", "fragment"),
    [
        (["train"], "--out"),
        (["denoise", "--out", "x"], "invalid choice"),
        (["exp1", "--out", "x", "--jobs", "0"], "--jobs"),
    ],
)
def test_usage_errors_end_with_json_error(capsys, argv, fragment):
    with pytest.raises(SystemExit) as info:
        main(argv)

    assert info.value.code == EXIT_DOMAIN
    error = _error(capsys)
    assert error["code"] == "usage_error"
    assert fragment in error["message"]


def test_log_files_follow_settings_log_dir(tmp_path, capsys, monkeypatch):
    logs = tmp_path / "custom_logs"
    monkeypatch.setattr(settings, "LOG_DIR", str(logs))

    code = main(["synth", "--out", str(tmp_path), "--set", "synth.n_speakers=0"])

    assert code == EXIT_DOMAIN
    assert (logs / "seganforge.log").is_file()
    assert "synth.n_speakers" in (logs / "errors.log").read_text(encoding="utf-8")


def test_help_lists_config_keys(capsys):
    with pytest.raises(SystemExit) as info:
        main(["train", "--help"])

    assert info.value.code == 0
    out = capsys.readouterr().out
    assert "data.manifest" in out
    assert "train.lambda_l1" in out


def test_exp1_dry_run_with_preset(tmp_path, capsys):
    out = tmp_path / "exp1"

    code = main(["exp1", "--out", str(out), "--preset", "desk", "--dry-run"])

    assert code == EXIT_OK
    summary = _summary(capsys)
    assert summary["dry_run"] is True
    assert summary["runs_per_mode"] == {"preeng": 11, "scratch": 11}
    assert summary["planned_runs"] == 22
    assert (out / PLANNED_RUNS_CSV).is_file()
    effective = json.loads((out / "effective_config.json").read_text(encoding="utf-8"))
    assert effective["plan"]["profile"] == "desk"


def test_explicit_plan_keys_win_over_preset(tmp_path, capsys):
    code = main(
        [
            "exp2",
            "--out",
            str(tmp_path),
            "--preset",
            "desk",
            "--dry-run",
            "--set",
            "plan.noise_counts=[1, 2]",
        ]
    )

    assert code == EXIT_OK
    assert _summary(capsys)["planned_runs"] == 2 * 3 * 2


def test_report_from_results_table(tmp_path, capsys):
    experiment_dir = tmp_path / "exp"
    results = [
        RunResult(
            run_id=f"exp1-d{axis:g}-r00-{mode}",
            experiment="exp1",
            axis=axis,
            repeat=0,
            init_mode=mode,
            seed=index,
            metrics=MetricsReport(ssnr=float(index), llr=0.4, wss=30.0),
        )
        for index, (axis, mode) in enumerate([(24.0, "preeng"), (60.0, "preeng"), (24.0, "scratch")])
    ]
    write_results_csv(results, experiment_dir / "results.csv", record_wall_time=False)

    code = main(
        [
            "report",
            "--out",
            str(tmp_path / "charts"),
            "--set",
            f'report.experiment_dir="{experiment_dir}"',
        ]
    )

    assert code == EXIT_OK
    summary = _summary(capsys)
    assert summary["rows"] == 9
    assert (tmp_path / "charts" / "exp1_ssnr.svg").is_file()
    assert (tmp_path / "charts" / "aggregates.csv").is_file()


def test_report_without_tables_fails(tmp_path, capsys):
    code = main(["report", "--out", str(tmp_path / "charts"), "--set", f'report.experiment_dir="{tmp_path}"'])

    assert code == EXIT_DOMAIN
    assert _error(capsys)["code"] == "config_invalid"


@pytest.mark.slow
def test_train_enhance_evaluate_pipeline(tmp_path, capsys, tiny_corpus):
    model_dir = tmp_path / "model"
    code = main(
        [
            "train",
            "--out",
            str(model_dir),
            "--set",
            f'data.manifest="{tiny_corpus.train_manifest}"',
            "--set",
            "data.duration_s=1.0",
            "--set",
            'train.profile="tiny"',
            "--set",
            "train.epochs=1",
            "--set",
            "train.batch_size=16",
        ]
    )
    assert code == EXIT_OK
    trained = _summary(capsys)
    assert trained["utterances"] == 2
    assert (model_dir / "final.sgck").is_file()
    assert (model_dir / "losses.csv").is_file()

    enhanced_dir = tmp_path / "enhanced"
    code = main(
        [
            "enhance",
            "--out",
            str(enhanced_dir),
            "--set",
            f'enhance.checkpoint="{model_dir / "final.sgck"}"',
            "--set",
            f'enhance.input="{tiny_corpus.test_manifest.parent / "test"}"',
        ]
    )
    assert code == EXIT_OK
    assert len(_summary(capsys)["enhanced"]) == 3

    code = main(
        [
            "evaluate",
            "--out",
            str(tmp_path / "scores"),
            "--set",
            f'evaluate.manifest="{tiny_corpus.test_manifest}"',
            "--set",
            f'evaluate.degraded_dir="{enhanced_dir}"',
            "--set",
            "metrics.use_pesq=false",
        ]
    )
    assert code == EXIT_OK
    assert _summary(capsys)["failed"] == 0
