"""Pydantic models for configurations, plans and reports"""

from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator, model_validator

CANONICAL_SAMPLE_RATE_HZ = 16000

# Train and test SNR grids (dB), interleaved so no test SNR is seen in training
TRAIN_SNRS_DB: tuple[float, ...] = (15.0, 10.0, 5.0, 0.0)
TEST_SNRS_DB: tuple[float, ...] = (17.5, 12.5, 7.5, 2.5)

InitMode = Literal["preeng", "scratch"]


class NoiseCondition(BaseModel):
    """Noise type and mixing SNR attached to a noisy clip"""

    model_config = {"frozen": True}

    noise_type: str
    snr_db: float


class ManifestRecord(BaseModel):
    """One row of a corpus manifest (tab-separated on disk)"""

    utterance_id: str
    speaker_id: str
    language: str
    clean_path: str
    noise_type: str
    snr_db: float
    mixed_path: str
    duration_s: float = Field(ge=0.0)

    @property
    def condition(self) -> NoiseCondition:
        return NoiseCondition(noise_type=self.noise_type, snr_db=self.snr_db)


class FrameSpec(BaseModel):
    """Short-time analysis framing shared by the DSP quality metrics"""

    frame_ms: float = Field(default=30.0, gt=0.0)
    overlap_fraction: float = Field(default=0.75, ge=0.0, lt=1.0)
    window: Literal["hanning"] = "hanning"

    def frame_length(self, sample_rate_hz: int) -> int:
        return int(round(self.frame_ms * sample_rate_hz / 1000.0))

    def hop_length(self, sample_rate_hz: int) -> int:
        return max(1, int(round(self.frame_length(sample_rate_hz) * (1.0 - self.overlap_fraction))))


class MetricsReport(BaseModel):
    """Objective quality metrics for one utterance or an aggregate over many"""

    pesq: float | None = None
    csig: float | None = None
    cbak: float | None = None
    covl: float | None = None
    ssnr: float
    llr: float = Field(ge=0.0)
    wss: float = Field(ge=0.0)
    n_utterances: int = Field(default=1, ge=0)

    @model_validator(mode="after")
    def _composites_follow_pesq(self) -> "MetricsReport":
        composites = (self.csig, self.cbak, self.covl)
        if self.pesq is None and any(value is not None for value in composites):
            raise ValueError("csig/cbak/covl require pesq")
        if self.pesq is not None and any(value is None for value in composites):
            raise ValueError("pesq present but composite measures missing")
        for value in composites:
            if value is not None and not 1.0 <= value <= 5.0:
                raise ValueError(f"composite measure {value} outside [1, 5]")
        return self

    def metric(self, name: str) -> float | None:
        return getattr(self, name)


METRIC_NAMES: tuple[str, ...] = ("pesq", "csig", "cbak", "covl", "ssnr", "llr", "wss")


class UtteranceMetrics(BaseModel):
    """Per-utterance metrics row; failed utterances are kept as flagged rows"""

    utterance_id: str
    noise_type: str = ""
    snr_db: float | None = None
    report: MetricsReport | None = None
    status: Literal["ok", "failed"] = "ok"
    error: str | None = None


class GeneratorConfig(BaseModel):
    """Encoder-decoder generator architecture"""

    window_len: int = Field(gt=0)
    kernel_width: int = Field(default=31, gt=0)
    stride: int = Field(default=2, ge=1)
    encoder_channels: list[int]
    final_activation: Literal["tanh"] = "tanh"

    @field_validator("encoder_channels")
    @classmethod
    def _channels_positive(cls, channels: list[int]) -> list[int]:
        if not channels or any(c <= 0 for c in channels):
            raise ValueError("encoder_channels must be a non-empty list of positive ints")
        return channels

    @model_validator(mode="after")
    def _window_divisible(self) -> "GeneratorConfig":
        factor = self.stride ** len(self.encoder_channels)
        if self.window_len % factor != 0:
            raise ValueError(
                f"window_len {self.window_len} not divisible by stride^n_layers = {factor}"
            )
        if not 0 <= self.output_padding < max(self.stride, 2):
            raise ValueError(
                f"kernel_width {self.kernel_width} cannot double length at stride {self.stride}"
            )
        return self

    @property
    def n_layers(self) -> int:
        return len(self.encoder_channels)

    @property
    def padding(self) -> int:
        return (self.kernel_width - 1) // 2

    @property
    def output_padding(self) -> int:
        """Transposed-conv tail padding making every decoder layer exactly undo one stride"""
        return self.stride + 2 * self.padding - self.kernel_width

    @property
    def latent_length(self) -> int:
        return self.window_len // self.stride**self.n_layers

    @property
    def z_dims(self) -> tuple[int, int]:
        return (self.encoder_channels[-1], self.latent_length)


class DiscriminatorConfig(BaseModel):
    """Conditioned discriminator architecture (no normalization layers)"""

    window_len: int = Field(gt=0)
    kernel_width: int = Field(default=31, gt=0)
    stride: int = Field(default=2, ge=1)
    channels: list[int]
    leaky_slope: float = Field(default=0.3, ge=0.0)

    @model_validator(mode="after")
    def _window_divisible(self) -> "DiscriminatorConfig":
        if not self.channels or self.window_len % self.stride ** len(self.channels) != 0:
            raise ValueError("window_len must be divisible by stride^n_layers")
        return self

    @property
    def padding(self) -> int:
        return (self.kernel_width - 1) // 2

    @property
    def output_length(self) -> int:
        return self.window_len // self.stride ** len(self.channels)


class TrainConfig(BaseModel):
    """Adversarial training hyper-parameters"""

    profile: str = "desk"
    batch_size: int = Field(default=100, ge=1)
    epochs: int = Field(default=30, ge=0)
    lr: float = Field(default=0.0002, ge=0.0)
    rmsprop_decay: float = Field(default=0.9, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    lambda_l1: float = Field(default=100.0, ge=0.0)
    init_mode: InitMode = "scratch"
    base_checkpoint: str | None = None
    freeze_discriminator: bool = False
    seed: int = Field(default=0, ge=0)
    preemph: float = Field(default=0.95, ge=0.0, lt=1.0)
    train_overlap: float = Field(default=0.0, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def _pretrained_needs_base(self) -> "TrainConfig":
        if self.init_mode == "preeng" and not self.base_checkpoint:
            raise ValueError("init_mode 'preeng' requires base_checkpoint")
        return self


class Provenance(BaseModel):
    """Training provenance stored with every checkpoint"""

    tool_version: str
    epochs_completed: int = 0
    seed: int = Field(default=0, ge=0)
    corpus_fingerprint: str = ""
    init_mode: InitMode = "scratch"
    base_fingerprint: str | None = None
    profile: str = ""
    preemph: float = 0.95
    discriminator_normalization: str = "none"
    notes: list[str] = Field(default_factory=list)


class Exp1Plan(BaseModel):
    """Training-duration sweep"""

    name: str = "exp1"
    durations_s: list[float]
    repeats: list[int]
    init_modes: list[InitMode] = Field(default_factory=lambda: ["preeng", "scratch"])
    base_checkpoint: str | None = None
    train_manifest: str = ""
    test_manifest: str = ""
    master_seed: int = Field(default=0, ge=0)
    profile: str = "desk"
    train: dict[str, Any] = Field(default_factory=dict)
    dry_run: bool = False
    record_wall_time: bool = False
    max_failure_fraction: float = Field(default=0.2, ge=0.0, le=1.0)
    include_baselines: bool = True

    @model_validator(mode="after")
    def _repeats_align(self) -> "Exp1Plan":
        if len(self.repeats) != len(self.durations_s):
            raise ValueError("repeats must have one entry per duration")
        if any(r < 1 for r in self.repeats):
            raise ValueError("repeats must be >= 1")
        if not self.init_modes:
            raise ValueError("init_modes must not be empty")
        return self


class Exp2Plan(BaseModel):
    """Training-noise-type-count sweep at fixed training duration"""

    name: str = "exp2"
    noise_counts: list[int] = Field(default_factory=lambda: list(range(1, 11)))
    runs_per_count: int = Field(default=5, ge=1)
    fixed_duration_s: float = Field(default=1200.0, gt=0.0)
    init_modes: list[InitMode] = Field(default_factory=lambda: ["preeng", "scratch"])
    base_checkpoint: str | None = None
    train_manifest: str = ""
    test_manifest: str = ""
    master_seed: int = Field(default=0, ge=0)
    profile: str = "desk"
    train: dict[str, Any] = Field(default_factory=dict)
    dry_run: bool = False
    record_wall_time: bool = False
    max_failure_fraction: float = Field(default=0.2, ge=0.0, le=1.0)
    include_baselines: bool = True
    allow_noise_overlap: bool = False

    @field_validator("noise_counts")
    @classmethod
    def _counts_positive(cls, counts: list[int]) -> list[int]:
        if not counts or any(c < 1 for c in counts):
            raise ValueError("noise_counts must be a non-empty list of ints >= 1")
        return counts


class PlannedRun(BaseModel):
    """One enumerated (axis, repeat, mode) cell of a plan"""

    run_id: str
    experiment: str
    axis: float
    repeat: int
    init_mode: InitMode
    seed: int
    data_seed: int


class RunResult(BaseModel):
    """Outcome of one planned training run"""

    run_id: str
    experiment: str
    axis: float
    repeat: int
    init_mode: InitMode
    seed: int
    data_seed: int = 0
    status: Literal["ok", "failed"] = "ok"
    failure_code: str | None = None
    metrics: MetricsReport | None = None
    by_noise_type: dict[str, MetricsReport] = Field(default_factory=dict)
    subset: list[str] = Field(default_factory=list)
    noise_types: list[str] = Field(default_factory=list)
    wall_s: float = 0.0


class Baseline(BaseModel):
    """Reference level drawn as a horizontal line in the experiment charts"""

    name: Literal["noisy", "unadapted"]
    metrics: MetricsReport
    by_noise_type: dict[str, MetricsReport] = Field(default_factory=dict)


class AggregateRow(BaseModel):
    """Mean and unbiased standard deviation of one metric over the runs of one cell"""

    axis: float
    init_mode: InitMode
    metric: str
    mean: float
    std: float
    n_runs: int
    noise_type: str | None = None


# Command configuration documents (one TOML file per invocation, tables named as below)


class SynthSettings(BaseModel):
    """Synthetic desk corpus generation"""

    n_speakers: int = Field(default=6, ge=1)
    utterances_per_speaker: int = Field(default=10, ge=1)
    utterance_s: float = Field(default=3.0, gt=0.0)
    noise_s: float = Field(default=20.0, gt=0.0)
    seed: int = Field(default=0, ge=0)


class MixSettings(BaseModel):
    """Noisy corpus construction from clean and noise directories"""

    clean_dir: str
    noise_dir: str
    train_noise_types: list[str] | None = None
    test_noise_types: list[str] | None = None
    test_speakers: list[str] | None = None
    train_snrs_db: list[float] = Field(default_factory=lambda: list(TRAIN_SNRS_DB))
    test_snrs_db: list[float] = Field(default_factory=lambda: list(TEST_SNRS_DB))
    language: str = ""
    seed: int = Field(default=0, ge=0)
    allow_overlap: bool = False


class DataSettings(BaseModel):
    """Training data selection for train/finetune"""

    manifest: str
    duration_s: float | None = Field(default=None, gt=0.0)
    subset_seed: int = Field(default=0, ge=0)


class EnhanceSettings(BaseModel):
    checkpoint: str
    input: str
    seed: int = Field(default=0, ge=0)
    batch_size: int = Field(default=32, ge=1)


class MetricsSettings(BaseModel):
    frame_ms: float = Field(default=30.0, gt=0.0)
    overlap_fraction: float = Field(default=0.75, ge=0.0, lt=1.0)
    lpc_order: int = Field(default=10, ge=1)
    ssnr_clipped: bool = True
    use_pesq: bool = True

    def frame_spec(self) -> FrameSpec:
        return FrameSpec(frame_ms=self.frame_ms, overlap_fraction=self.overlap_fraction)


class EvaluateSettings(BaseModel):
    """Score the mixtures of a manifest, or enhanced files named ``<mixture stem><suffix>``"""

    manifest: str
    degraded_dir: str | None = None
    suffix: str = ".enhanced.wav"


class ReportSettings(BaseModel):
    experiment_dir: str
    experiment: Literal["exp1", "exp2"] = "exp1"


class SynthCommandConfig(BaseModel):
    synth: SynthSettings = Field(default_factory=SynthSettings)


class MixCommandConfig(BaseModel):
    mix: MixSettings


class TrainCommandConfig(BaseModel):
    data: DataSettings
    train: TrainConfig = Field(default_factory=TrainConfig)


class EnhanceCommandConfig(BaseModel):
    enhance: EnhanceSettings


class EvaluateCommandConfig(BaseModel):
    evaluate: EvaluateSettings
    metrics: MetricsSettings = Field(default_factory=MetricsSettings)


class Exp1CommandConfig(BaseModel):
    plan: Exp1Plan


class Exp2CommandConfig(BaseModel):
    plan: Exp2Plan


class ReportCommandConfig(BaseModel):
    report: ReportSettings
