"""SEGAN generator/discriminator, training, checkpoints and enhancement"""

from seganforge.segan.checkpoint import (
    ModelCheckpoint,
    fingerprint_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from seganforge.segan.data import corpus_fingerprint, make_training_pairs
from seganforge.segan.enhance import enhance, load_generator
from seganforge.segan.losses import discriminator_loss, generator_loss, losses
from seganforge.segan.networks import (
    Discriminator,
    Generator,
    discriminator_forward,
    generator_forward,
)
from seganforge.segan.profiles import PROFILES, discriminator_config, generator_config
from seganforge.segan.trainer import (
    LossRecord,
    SeganTrainer,
    TrainingResult,
    finetune,
    train,
    train_from_config,
)

__all__ = [
    "PROFILES",
    "Discriminator",
    "Generator",
    "LossRecord",
    "ModelCheckpoint",
    "SeganTrainer",
    "TrainingResult",
    "corpus_fingerprint",
    "discriminator_config",
    "discriminator_forward",
    "discriminator_loss",
    "enhance",
    "finetune",
    "fingerprint_checkpoint",
    "generator_config",
    "generator_forward",
    "generator_loss",
    "load_checkpoint",
    "load_generator",
    "losses",
    "make_training_pairs",
    "save_checkpoint",
    "train",
    "train_from_config",
]
