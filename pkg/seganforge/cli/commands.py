"""Subcommand handlers: thin wrappers over the audio, segan, metrics and experiments packages"""

import argparse
import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from seganforge.audio.manifest import load_record_clips, read_manifest
from seganforge.audio.wav import load_wav, write_wav
from seganforge.cli.parser import COMMAND_MODELS
from seganforge.config import settings
from seganforge.exceptions import ConfigError
from seganforge.experiments.aggregate import aggregate, read_aggregates_csv
from seganforge.experiments.corpus import build_corpus
from seganforge.experiments.plans import exp1_preset, exp2_preset, runs_per_mode
from seganforge.experiments.report import AGGREGATES_CSV, BASELINES_CSV, emit_report, read_baselines_csv
from seganforge.experiments.runner import RESULTS_CSV, read_results_csv, run_exp1, run_exp2, training_pairs
from seganforge.experiments.sampling import sample_training_subset
from seganforge.experiments.synthetic import generate_synthetic_corpus
from seganforge.metrics.evaluation import (
    EvaluationPair,
    evaluate_corpus,
    write_breakdown_csv,
    write_metrics_csv,
)
from seganforge.metrics.pesq import PesqAdapter
from seganforge.models.schemas import (
    EnhanceCommandConfig,
    EvaluateCommandConfig,
    Exp1CommandConfig,
    Exp2CommandConfig,
    MixCommandConfig,
    ReportCommandConfig,
    SynthCommandConfig,
    TrainCommandConfig,
)
from seganforge.segan.checkpoint import load_checkpoint
from seganforge.segan.enhance import enhance, load_generator
from seganforge.segan.trainer import train_from_config
from seganforge.utils.config_files import (
    apply_overrides,
    load_toml,
    validate_document,
    write_effective_config,
    write_provenance,
)
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

ENHANCED_SUFFIX = ".enhanced.wav"
METRICS_CSV = "metrics.csv"
BREAKDOWN_CSV = "breakdown.csv"
SUMMARY_JSON = "summary.json"
PRESETS = {"exp1": exp1_preset, "exp2": exp2_preset}


def _emit(summary: dict[str, Any]) -> None:
    """One JSON line on stdout per successful command"""
    print(json.dumps(summary, sort_keys=True))


class CommandHandler:
    """Resolve the effective config of a subcommand and run it"""

    def __init__(self, args: argparse.Namespace):
        """
        Initialize CommandHandler.

        Args:
            args: Parsed command line (``command``, ``config``, ``overrides``, ``out`` and the
                  experiment flags)
        """
        self.args = args
        self.out_dir = Path(args.out)

    def handle(self) -> dict[str, Any]:
        """
        Run the selected subcommand.

        Returns:
            dict: Summary printed as the command's stdout line

        Raises:
            ConfigError: Unreadable or invalid configuration
            SeganForgeError: Propagated from the wrapped operation
        """
        command = self.args.command
        handler = getattr(self, f"_handle_{command}")
        config = self._load_config(command)
        logger.info(f"Command started | command={command} | out_dir={self.out_dir}")
        summary = handler(config)
        logger.info(f"Command finished | command={command} | out_dir={self.out_dir}")
        _emit(summary)
        return summary

    def _load_config(self, command: str) -> BaseModel:
        document = apply_overrides(load_toml(self.args.config), self.args.overrides)
        if command in PRESETS:
            document = self._apply_preset(command, document)
        if command == "finetune":
            document.setdefault("train", {})["init_mode"] = "preeng"
        config = validate_document(COMMAND_MODELS[command], document)
        write_effective_config(config, self.out_dir)
        return config

    def _apply_preset(self, command: str, document: dict[str, Any]) -> dict[str, Any]:
        """Fill plan keys the user left unset from ``--preset`` or ``plan.preset``"""
        plan = document.get("plan", {})
        if not isinstance(plan, dict):
            raise ConfigError("plan must be a table")
        file_preset = plan.pop("preset", None)
        preset = self.args.preset or file_preset
        if preset is not None:
            defaults = PRESETS[command](preset).model_dump(mode="json")
            plan = {**defaults, **plan}
        if self.args.dry_run:
            plan["dry_run"] = True
        return {**document, "plan": plan}

    def _provenance(self, config: BaseModel, seeds: dict[str, int]) -> None:
        write_provenance(config, self.out_dir, self.args.command, seeds)

    def _handle_synth(self, config: SynthCommandConfig) -> dict[str, Any]:
        synth = config.synth
        self._provenance(config, {"synth": synth.seed})
        corpus = generate_synthetic_corpus(self.out_dir, **synth.model_dump())
        return {
            "clean_dir": str(corpus.clean_dir),
            "noise_dir": str(corpus.noise_dir),
            "speakers": len(corpus.speakers),
            "train_noise_types": corpus.train_noise_types,
            "test_noise_types": corpus.test_noise_types,
        }

    def _handle_mix(self, config: MixCommandConfig) -> dict[str, Any]:
        mix = config.mix
        self._provenance(config, {"mix": mix.seed})
        build = build_corpus(
            mix.clean_dir,
            mix.noise_dir,
            self.out_dir,
            train_noise_types=mix.train_noise_types,
            test_noise_types=mix.test_noise_types,
            test_speakers=mix.test_speakers,
            train_snrs_db=mix.train_snrs_db,
            test_snrs_db=mix.test_snrs_db,
            language=mix.language,
            seed=mix.seed,
            allow_overlap=mix.allow_overlap,
        )
        return {
            "train_manifest": str(build.train_manifest),
            "test_manifest": str(build.test_manifest) if build.test_manifest else None,
            "train_rows": len(build.train_records),
            "test_rows": len(build.test_records),
            "skipped": build.skipped,
        }

    def _handle_train(self, config: TrainCommandConfig) -> dict[str, Any]:
        data, cfg = config.data, config.train
        self._provenance(config, {"train": cfg.seed, "subset": data.subset_seed})
        records = read_manifest(data.manifest)
        if data.duration_s is not None:
            records = sample_training_subset(records, data.duration_s, data.subset_seed)
        result = train_from_config(training_pairs(records, cfg), cfg, self.out_dir)
        losses = result.epoch_l1()
        return {
            "checkpoint": str(result.checkpoint_path),
            "init_mode": cfg.init_mode,
            "utterances": len(records),
            "epochs": cfg.epochs,
            "final_l1": losses[-1] if losses else None,
        }

    _handle_finetune = _handle_train

    def _handle_enhance(self, config: EnhanceCommandConfig) -> dict[str, Any]:
        options = config.enhance
        self._provenance(config, {"enhance": options.seed})
        source = Path(options.input)
        if source.is_dir():
            inputs = [
                path for path in sorted(source.glob("*.wav")) if not path.name.endswith(ENHANCED_SUFFIX)
            ]
        elif source.is_file():
            inputs = [source]
        else:
            raise ConfigError(f"enhance.input not found: {source}")
        if not inputs:
            raise ConfigError(f"No WAV files to enhance in {source}")

        ckpt = load_checkpoint(options.checkpoint)
        generator = load_generator(ckpt)
        written = []
        for path in inputs:
            clip = load_wav(path)
            enhanced = enhance(
                clip, ckpt, options.seed, batch_size=options.batch_size, generator=generator
            )
            target = self.out_dir / f"{path.stem}{ENHANCED_SUFFIX}"
            write_wav(enhanced, target)
            written.append(str(target))
        return {"enhanced": written}

    def _handle_evaluate(self, config: EvaluateCommandConfig) -> dict[str, Any]:
        evaluate, metrics = config.evaluate, config.metrics
        self._provenance(config, {})
        pairs = []
        for record in read_manifest(evaluate.manifest):
            clean, mixed = load_record_clips(record)
            degraded = mixed
            if evaluate.degraded_dir is not None:
                name = f"{Path(record.mixed_path).stem}{evaluate.suffix}"
                degraded = load_wav(Path(evaluate.degraded_dir) / name, utterance_id=record.utterance_id)
            pairs.append(EvaluationPair(clean=clean, degraded=degraded))

        adapter = PesqAdapter.from_settings(settings) if metrics.use_pesq else None
        if adapter is None:
            logger.info("No PESQ adapter configured | pesq/csig/cbak/covl columns stay empty")
        evaluation = evaluate_corpus(
            pairs,
            metrics.frame_spec(),
            adapter,
            lpc_order=metrics.lpc_order,
            ssnr_clipped=metrics.ssnr_clipped,
        )
        write_metrics_csv(evaluation.rows, self.out_dir / METRICS_CSV)
        write_breakdown_csv(evaluation, self.out_dir / BREAKDOWN_CSV)
        summary = {
            "report": evaluation.report.model_dump(mode="json"),
            "by_noise_type": {
                key: value.model_dump(mode="json") for key, value in evaluation.by_noise_type.items()
            },
            "failed": sum(1 for row in evaluation.rows if row.status == "failed"),
        }
        (self.out_dir / SUMMARY_JSON).write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return {"metrics_csv": str(self.out_dir / METRICS_CSV), **summary}

    def _run_plan(self, config: Exp1CommandConfig | Exp2CommandConfig) -> dict[str, Any]:
        plan = config.plan
        experiment = self.args.command
        self._provenance(config, {"master_seed": plan.master_seed})
        adapter = PesqAdapter.from_settings(settings)
        run = run_exp1 if experiment == "exp1" else run_exp2
        outcome = run(plan, self.out_dir, jobs=self.args.jobs, adapter=adapter)
        summary: dict[str, Any] = {
            "planned_runs": len(outcome.planned),
            "runs_per_mode": runs_per_mode(outcome.planned),
            "dry_run": plan.dry_run,
        }
        if plan.dry_run:
            return summary

        rows = aggregate(outcome.results) + aggregate(outcome.results, per_noise_type=True)
        charts = emit_report(rows, outcome.baselines, self.out_dir, experiment=experiment)
        summary.update(
            failed_runs=len(outcome.failures),
            charts=[str(chart.path) for chart in charts],
        )
        return summary

    _handle_exp1 = _run_plan
    _handle_exp2 = _run_plan

    def _handle_report(self, config: ReportCommandConfig) -> dict[str, Any]:
        report = config.report
        self._provenance(config, {})
        source = Path(report.experiment_dir)
        if (source / AGGREGATES_CSV).is_file():
            rows = read_aggregates_csv(source / AGGREGATES_CSV)
        elif (source / RESULTS_CSV).is_file():
            rows = aggregate(read_results_csv(source / RESULTS_CSV))
        else:
            raise ConfigError(f"No {AGGREGATES_CSV} or {RESULTS_CSV} in {source}")
        baselines = read_baselines_csv(source / BASELINES_CSV)
        charts = emit_report(rows, baselines, self.out_dir, experiment=report.experiment)
        return {"charts": [str(chart.path) for chart in charts], "rows": len(rows)}
