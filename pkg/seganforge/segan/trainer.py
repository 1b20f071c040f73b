"""Adversarial training and fine-tuning loops"""

import csv
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from seganforge import __version__
from seganforge.exceptions import (
    ArchitectureMismatchError,
    NonFiniteError,
    ShapeError,
    TrainingDivergedError,
)
from seganforge.models.schemas import Provenance, TrainConfig
from seganforge.segan.checkpoint import (
    ModelCheckpoint,
    fingerprint_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from seganforge.segan.data import ChunkPair, corpus_fingerprint
from seganforge.segan.losses import discriminator_loss, generator_loss
from seganforge.segan.networks import Discriminator, Generator
from seganforge.segan.profiles import discriminator_config, generator_config
from seganforge.tensorgrad import RMSprop, Tensor
from seganforge.utils.logging import get_logger

logger = get_logger(__name__)

LOSS_LOG_COLUMNS = ("epoch", "batch", "d_loss", "g_loss", "l1_term")
LATEST_CHECKPOINT = "latest.sgck"
FINAL_CHECKPOINT = "final.sgck"
LOSS_LOG = "losses.csv"
NORMALIZATION_NOTE = "discriminator trained without virtual batch normalization"


@dataclass
class LossRecord:
    epoch: int
    batch: int
    d_loss: float
    g_loss: float
    l1_term: float


@dataclass
class TrainingResult:
    checkpoint: ModelCheckpoint
    losses: list[LossRecord] = field(default_factory=list)
    checkpoint_path: Path | None = None

    def epoch_l1(self) -> list[float]:
        """Mean L1 term per epoch, in epoch order"""
        by_epoch: dict[int, list[float]] = {}
        for record in self.losses:
            by_epoch.setdefault(record.epoch, []).append(record.l1_term)
        return [float(np.mean(values)) for _, values in sorted(by_epoch.items())]


def _seed_streams(seed: int) -> dict[str, np.random.Generator]:
    init_seq, shuffle_seq, z_seq = np.random.SeedSequence(seed).spawn(3)
    g_seq, d_seq = init_seq.spawn(2)
    return {
        "g_init": np.random.default_rng(g_seq),
        "d_init": np.random.default_rng(d_seq),
        "shuffle": np.random.default_rng(shuffle_seq),
        "z": np.random.default_rng(z_seq),
    }


def _stack(chunks: Sequence) -> Tensor:
    return Tensor(np.stack([chunk.samples for chunk in chunks])[:, None, :])


class SeganTrainer:
    """
    Alternating discriminator/generator RMSprop updates over shuffled mini-batches.

    Shuffling and latent sampling draw from streams derived from ``cfg.seed``, so a given seed
    reproduces the same trajectory.
    """

    def __init__(
        self,
        generator: Generator,
        discriminator: Discriminator,
        cfg: TrainConfig,
        provenance: Provenance,
    ):
        self.generator = generator
        self.discriminator = discriminator
        self.cfg = cfg
        self.provenance = provenance
        streams = _seed_streams(cfg.seed)
        self.shuffle_rng = streams["shuffle"]
        self.z_rng = streams["z"]
        self.g_opt = RMSprop(generator.parameter_list(), cfg.lr, cfg.rmsprop_decay, cfg.eps)
        self.d_opt = RMSprop(discriminator.parameter_list(), cfg.lr, cfg.rmsprop_decay, cfg.eps)
        self.discriminator.set_trainable(not cfg.freeze_discriminator)
        self.epochs_completed = 0

    def load_optimizer_state(self, state: dict[str, np.ndarray]) -> None:
        self.g_opt.load_state_dict(state)
        self.d_opt.load_state_dict(state)

    def checkpoint(self) -> ModelCheckpoint:
        optimizer_state = {
            name: value.copy()
            for name, value in {**self.g_opt.state_dict(), **self.d_opt.state_dict()}.items()
        }
        return ModelCheckpoint(
            generator_config=self.generator.config,
            discriminator_config=self.discriminator.config,
            generator_params=self.generator.state_dict(),
            discriminator_params=self.discriminator.state_dict(),
            provenance=self.provenance.model_copy(update={"epochs_completed": self.epochs_completed}),
            optimizer_state=optimizer_state,
        )

    def _step(self, epoch: int, batch: int, pairs: list[ChunkPair]) -> LossRecord:
        cfg = self.cfg
        x_clean = _stack([clean for clean, _ in pairs])
        x_noisy = _stack([noisy for _, noisy in pairs])
        z = self.generator.sample_z(len(pairs), self.z_rng)
        term = "generator_forward"
        try:
            x_hat = self.generator.forward(x_noisy, z)

            term = "d_loss"
            d_real = self.discriminator.forward(x_clean, x_noisy)
            d_fake = self.discriminator.forward(x_hat.detach(), x_noisy)
            d_loss = discriminator_loss(d_real, d_fake)
            if not cfg.freeze_discriminator:
                d_loss.backward()
                self.d_opt.step()

            term = "g_loss"
            g_loss, l1_term = generator_loss(
                self.discriminator.forward(x_hat, x_noisy), x_hat, x_clean, cfg.lambda_l1
            )
            g_loss.backward()
            self.g_opt.step()
            # the generator pass leaves gradients on D
            self.d_opt.zero_grad()
        except NonFiniteError as exc:
            logger.error(
                f"Training diverged | epoch={epoch} | batch={batch} | term={term} | error={exc}"
            )
            raise TrainingDivergedError(epoch, batch, term, float("nan")) from exc
        return LossRecord(epoch, batch, d_loss.item(), g_loss.item(), l1_term.item())

    def fit(self, corpus: Sequence[ChunkPair], out_dir: str | Path | None = None) -> TrainingResult:
        """
        Train for ``cfg.epochs`` epochs.

        Args:
            corpus: (clean, noisy) preemphasized chunk pairs of the model's window length
            out_dir: When set, receives ``latest.sgck`` after every epoch, ``final.sgck`` and
                the loss log ``losses.csv``

        Raises:
            ValueError: Empty corpus
            ShapeError: Chunks of the wrong window length
            TrainingDivergedError: A loss or gradient became NaN/Inf
        """
        if not corpus:
            raise ValueError("Training corpus is empty")
        window_len = self.generator.config.window_len
        for clean, noisy in corpus:
            if clean.window_len != window_len or noisy.window_len != window_len:
                raise ShapeError(
                    f"Chunk length {clean.window_len}/{noisy.window_len} does not match model "
                    f"window {window_len}"
                )
        out_path = Path(out_dir) if out_dir is not None else None
        log_path = None
        if out_path is not None:
            out_path.mkdir(parents=True, exist_ok=True)
            log_path = out_path / LOSS_LOG
            with log_path.open("w", encoding="utf-8", newline="") as handle:
                csv.writer(handle, lineterminator="\n").writerow(LOSS_LOG_COLUMNS)

        cfg = self.cfg
        logger.info(
            f"Training started | pairs={len(corpus)} | epochs={cfg.epochs} | batch_size={cfg.batch_size} | "
            f"init_mode={self.provenance.init_mode} | freeze_d={cfg.freeze_discriminator} | seed={cfg.seed}"
        )
        records: list[LossRecord] = []
        for epoch in range(1, cfg.epochs + 1):
            order = self.shuffle_rng.permutation(len(corpus))
            epoch_records = []
            for batch, start in enumerate(range(0, len(corpus), cfg.batch_size)):
                pairs = [corpus[int(i)] for i in order[start : start + cfg.batch_size]]
                epoch_records.append(self._step(epoch, batch, pairs))
            self.epochs_completed = epoch
            records.extend(epoch_records)
            logger.info(
                f"Epoch finished | epoch={epoch} | "
                f"d_loss={np.mean([r.d_loss for r in epoch_records]):.4f} | "
                f"g_loss={np.mean([r.g_loss for r in epoch_records]):.4f} | "
                f"l1={np.mean([r.l1_term for r in epoch_records]):.5f}"
            )
            if out_path is not None:
                with log_path.open("a", encoding="utf-8", newline="") as handle:
                    writer = csv.writer(handle, lineterminator="\n")
                    for r in epoch_records:
                        writer.writerow([r.epoch, r.batch, repr(r.d_loss), repr(r.g_loss), repr(r.l1_term)])
                save_checkpoint(self.checkpoint(), out_path / LATEST_CHECKPOINT)

        final = self.checkpoint()
        final_path = save_checkpoint(final, out_path / FINAL_CHECKPOINT) if out_path is not None else None
        return TrainingResult(checkpoint=final, losses=records, checkpoint_path=final_path)


def train(
    corpus: Sequence[ChunkPair], cfg: TrainConfig, out_dir: str | Path | None = None
) -> TrainingResult:
    """Train a model of profile ``cfg.profile`` from seeded random initialization."""
    streams = _seed_streams(cfg.seed)
    generator = Generator(generator_config(cfg.profile), streams["g_init"])
    discriminator = Discriminator(discriminator_config(cfg.profile), streams["d_init"])
    provenance = Provenance(
        tool_version=__version__,
        seed=cfg.seed,
        corpus_fingerprint=corpus_fingerprint(corpus),
        init_mode="scratch",
        profile=cfg.profile,
        preemph=cfg.preemph,
        notes=[NORMALIZATION_NOTE],
    )
    trainer = SeganTrainer(generator, discriminator, cfg, provenance)
    return trainer.fit(corpus, out_dir)


def finetune(
    base: ModelCheckpoint,
    corpus: Sequence[ChunkPair],
    cfg: TrainConfig,
    out_dir: str | Path | None = None,
) -> TrainingResult:
    """
    Continue training from ``base``: G, D and optimizer accumulators start from the checkpoint.

    Raises:
        ArchitectureMismatchError: ``base`` was not built with ``cfg.profile``
    """
    expected_g = generator_config(cfg.profile)
    expected_d = discriminator_config(cfg.profile)
    if base.generator_config != expected_g or base.discriminator_config != expected_d:
        raise ArchitectureMismatchError(
            f"Base checkpoint architecture does not match profile {cfg.profile!r} | "
            f"base_window={base.generator_config.window_len} | "
            f"base_channels={base.generator_config.encoder_channels}"
        )
    generator = Generator(expected_g)
    generator.load_state_dict(base.generator_params)
    discriminator = Discriminator(expected_d)
    discriminator.load_state_dict(base.discriminator_params)
    provenance = Provenance(
        tool_version=__version__,
        seed=cfg.seed,
        corpus_fingerprint=corpus_fingerprint(corpus),
        init_mode="preeng",
        base_fingerprint=fingerprint_checkpoint(base),
        profile=cfg.profile,
        preemph=cfg.preemph,
        notes=[NORMALIZATION_NOTE],
    )
    trainer = SeganTrainer(generator, discriminator, cfg, provenance)
    trainer.load_optimizer_state(base.optimizer_state)
    return trainer.fit(corpus, out_dir)


def train_from_config(
    corpus: Sequence[ChunkPair], cfg: TrainConfig, out_dir: str | Path | None = None
) -> TrainingResult:
    """Dispatch on ``cfg.init_mode``: scratch trains, preeng fine-tunes ``cfg.base_checkpoint``."""
    if cfg.init_mode == "preeng":
        return finetune(load_checkpoint(cfg.base_checkpoint), corpus, cfg, out_dir)
    return train(corpus, cfg, out_dir)
