"""Least-squares adversarial losses with an L1 reconstruction term"""

import numpy as np

from seganforge.tensorgrad import Tensor, add, l1_loss, mse_loss, scale


def _constant_like(reference: Tensor, value: float) -> Tensor:
    return Tensor(np.full(reference.shape, value), dtype=reference.data.dtype.type)


def discriminator_loss(d_real: Tensor, d_fake: Tensor) -> Tensor:
    """1/2 mean((D(x) - 1)^2) + 1/2 mean(D(x_hat)^2)"""
    real_term = scale(mse_loss(d_real, _constant_like(d_real, 1.0)), 0.5)
    fake_term = scale(mse_loss(d_fake, _constant_like(d_fake, 0.0)), 0.5)
    return add(real_term, fake_term)


def generator_loss(
    d_fake: Tensor, x_hat: Tensor, x_clean: Tensor, lambda_l1: float
) -> tuple[Tensor, Tensor]:
    """
    Adversarial term plus weighted L1 distance to the clean chunk.

    Returns:
        tuple: (g_loss, unweighted mean L1 term)
    """
    adversarial = scale(mse_loss(d_fake, _constant_like(d_fake, 1.0)), 0.5)
    l1_term = l1_loss(x_hat, x_clean)
    return add(adversarial, scale(l1_term, lambda_l1)), l1_term


def losses(
    d_real: Tensor, d_fake: Tensor, x_hat: Tensor, x_clean: Tensor, lambda_l1: float
) -> tuple[Tensor, Tensor]:
    """(d_loss, g_loss) for one batch"""
    g_loss, _ = generator_loss(d_fake, x_hat, x_clean, lambda_l1)
    return discriminator_loss(d_real, d_fake), g_loss
