"""Exception types raised across the toolkit.

Every error carries a short machine-readable ``code`` so the command-line boundary can report
failures as one parseable line. Input-validation errors also derive from ``ValueError``.
"""


class SeganForgeError(Exception):
    """Base class for all toolkit errors"""

    code = "seganforge_error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class AudioFormatError(SeganForgeError, ValueError):
    """Malformed or unsupported WAV file"""

    code = "audio_format"


class SampleRateError(SeganForgeError, ValueError):
    """Sample rate other than the pipeline rate"""

    code = "sample_rate"

    def __init__(self, sample_rate_hz: int, expected_hz: int = 16000):
        super().__init__(f"Unsupported sample rate {sample_rate_hz} Hz (expected {expected_hz} Hz)")
        self.sample_rate_hz = sample_rate_hz


class EmptyClipError(SeganForgeError, ValueError):
    """Clip with no samples"""

    code = "empty_clip"


class DegenerateSignalError(SeganForgeError, ValueError):
    """Zero-power signal where a non-silent one is required"""

    code = "degenerate_signal"


class DegenerateFrameError(SeganForgeError, ValueError):
    """Analysis frame whose autocorrelation r[0] is zero"""

    code = "degenerate_frame"


class ShapeError(SeganForgeError, ValueError):
    """Tensor shapes incompatible with the requested operation"""

    code = "shape_mismatch"


class NonFiniteError(SeganForgeError):
    """NaN or Inf produced by a tensor operation"""

    code = "non_finite"


class MissingGradientError(SeganForgeError):
    """Optimizer step on a parameter without a populated gradient"""

    code = "missing_gradient"


class TrainingDivergedError(SeganForgeError):
    """Loss became NaN or Inf during training"""

    code = "training_diverged"

    def __init__(self, epoch: int, batch: int, term: str, value: float):
        super().__init__(
            f"Non-finite loss | epoch={epoch} | batch={batch} | term={term} | value={value}"
        )
        self.epoch = epoch
        self.batch = batch
        self.term = term


class ArchitectureMismatchError(SeganForgeError, ValueError):
    """Checkpoint architecture incompatible with the requested configuration"""

    code = "architecture_mismatch"


class CheckpointFormatError(SeganForgeError, ValueError):
    """Corrupt, truncated or wrong-version checkpoint file"""

    code = "checkpoint_format"


class PesqAdapterError(SeganForgeError):
    """External PESQ tool produced output that could not be parsed"""

    code = "pesq_adapter"

    def __init__(self, message: str, output: str = ""):
        super().__init__(message)
        self.output = output


class InsufficientCorpusError(SeganForgeError, ValueError):
    """Corpus too small for the requested subset"""

    code = "insufficient_corpus"


class PlanError(SeganForgeError, ValueError):
    """Invalid experiment plan"""

    code = "plan_invalid"


class ManifestChangedError(SeganForgeError):
    """Test manifest no longer matches the fingerprint recorded for the plan"""

    code = "manifest_changed"


class ExperimentAbortedError(SeganForgeError):
    """Too many runs of an experiment plan failed"""

    code = "experiment_aborted"


class ConfigError(SeganForgeError, ValueError):
    """Configuration file or override could not be parsed or validated"""

    code = "config_invalid"
