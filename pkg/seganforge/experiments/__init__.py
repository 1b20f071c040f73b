"""Duration and noise-type-count sweeps: corpora, sampling, orchestration, aggregation, charts"""

from seganforge.experiments.aggregate import aggregate, read_aggregates_csv, write_aggregates_csv
from seganforge.experiments.corpus import CorpusBuild, assign_conditions, build_corpus, condition_grid
from seganforge.experiments.plans import enumerate_runs, exp1_preset, exp2_preset, runs_per_mode
from seganforge.experiments.report import ChartSummary, emit_report, read_baselines_csv
from seganforge.experiments.runner import (
    ExperimentOutcome,
    compute_baselines,
    evaluate_checkpoint,
    read_results_csv,
    run_exp1,
    run_exp2,
    run_experiment,
    training_pairs,
)
from seganforge.experiments.sampling import sample_noise_types, sample_training_subset
from seganforge.experiments.synthetic import (
    FAMILY_A,
    FAMILY_B,
    TEST_NOISE_TYPES,
    TRAIN_NOISE_TYPES,
    generate_synthetic_corpus,
    synth_noise,
    synth_utterance,
)

__all__ = [
    "FAMILY_A",
    "FAMILY_B",
    "TEST_NOISE_TYPES",
    "TRAIN_NOISE_TYPES",
    "ChartSummary",
    "CorpusBuild",
    "ExperimentOutcome",
    "aggregate",
    "assign_conditions",
    "build_corpus",
    "compute_baselines",
    "condition_grid",
    "emit_report",
    "enumerate_runs",
    "evaluate_checkpoint",
    "exp1_preset",
    "exp2_preset",
    "generate_synthetic_corpus",
    "read_aggregates_csv",
    "read_baselines_csv",
    "read_results_csv",
    "run_exp1",
    "run_exp2",
    "run_experiment",
    "runs_per_mode",
    "sample_noise_types",
    "sample_training_subset",
    "synth_noise",
    "synth_utterance",
    "training_pairs",
    "write_aggregates_csv",
]
