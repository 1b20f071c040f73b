"""Finite-difference gradient checking in float64"""

from collections.abc import Callable

import numpy as np

from seganforge.tensorgrad.tensor import Tensor, float64_shadow


def gradcheck(
    fn: Callable[..., Tensor],
    inputs: list[np.ndarray],
    *,
    eps: float = 1e-3,
    seed: int = 0,
) -> float:
    """
    Compare backpropagated gradients of ``fn`` against central differences.

    The output is contracted with a fixed random projection so every output element
    contributes. Returns the worst relative error ||g_a - g_n|| / (||g_a|| + ||g_n||)
    across the inputs.
    """
    rng = np.random.default_rng(seed)
    with float64_shadow():
        arrays = [np.array(value, dtype=np.float64) for value in inputs]
        tensors = [Tensor(value, requires_grad=True) for value in arrays]
        out = fn(*tensors)
        projection = rng.standard_normal(out.shape)
        out.backward(projection)
        analytic = [
            tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
            for tensor in tensors
        ]

        def objective(values: list[np.ndarray]) -> float:
            return float(np.sum(fn(*[Tensor(v) for v in values]).data * projection))

        worst = 0.0
        for index, array in enumerate(arrays):
            numeric = np.zeros_like(array)
            flat = array.reshape(-1)
            numeric_flat = numeric.reshape(-1)
            for position in range(flat.size):
                original = flat[position]
                flat[position] = original + eps
                upper = objective(arrays)
                flat[position] = original - eps
                lower = objective(arrays)
                flat[position] = original
                numeric_flat[position] = (upper - lower) / (2.0 * eps)
            denom = np.linalg.norm(analytic[index]) + np.linalg.norm(numeric)
            if denom == 0.0:
                continue
            worst = max(worst, float(np.linalg.norm(analytic[index] - numeric) / denom))
    return worst
