"""RMSprop optimizer"""

import numpy as np

from seganforge.exceptions import MissingGradientError
from seganforge.tensorgrad.tensor import Parameter

DEFAULT_LR = 0.0002
DEFAULT_DECAY = 0.9
DEFAULT_EPS = 1e-8


def rmsprop_step(
    params: list[Parameter],
    lr: float = DEFAULT_LR,
    decay: float = DEFAULT_DECAY,
    eps: float = DEFAULT_EPS,
) -> None:
    """
    One RMSprop update over ``params``, then zero their gradients.

        s <- decay * s + (1 - decay) * g^2
        p <- p - lr * g / (sqrt(s) + eps)

    Raises:
        MissingGradientError: A parameter has no gradient buffer
    """
    for param in params:
        grad = param.tensor.grad
        if grad is None:
            raise MissingGradientError(f"Parameter has no gradient | name={param.name}")
        data = param.tensor.data
        if param.optimizer_state is None:
            param.optimizer_state = np.zeros_like(data)
        state = param.optimizer_state
        state *= decay
        state += (1.0 - decay) * grad * grad
        data -= lr * grad / (np.sqrt(state) + eps)
        grad.fill(0.0)


class RMSprop:
    """RMSprop over a fixed, named parameter list"""

    def __init__(
        self,
        params: list[Parameter],
        lr: float = DEFAULT_LR,
        decay: float = DEFAULT_DECAY,
        eps: float = DEFAULT_EPS,
    ):
        self.params = params
        self.lr = lr
        self.decay = decay
        self.eps = eps

    def step(self) -> None:
        rmsprop_step(self.params, lr=self.lr, decay=self.decay, eps=self.eps)

    def zero_grad(self) -> None:
        for param in self.params:
            param.tensor.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {
            param.name: param.optimizer_state
            for param in self.params
            if param.optimizer_state is not None
        }

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for param in self.params:
            if param.name in state:
                param.optimizer_state = np.array(state[param.name], dtype=param.tensor.data.dtype)
