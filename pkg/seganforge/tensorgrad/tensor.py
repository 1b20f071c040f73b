"""Tensor with an optional gradient buffer and reverse-mode backpropagation"""

from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from seganforge.exceptions import NonFiniteError

_compute_dtype: type[np.floating] = np.float32
_grad_enabled = True


def get_default_dtype() -> type[np.floating]:
    return _compute_dtype


@contextmanager
def float64_shadow() -> Iterator[None]:
    """Create tensors in float64 inside the block (used by gradient checks)."""
    global _compute_dtype
    previous = _compute_dtype
    _compute_dtype = np.float64
    try:
        yield
    finally:
        _compute_dtype = previous


@contextmanager
def no_grad() -> Iterator[None]:
    """Run ops without recording the graph (inference)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def check_finite(array: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(f"Non-finite values | op={where} | shape={tuple(array.shape)}")


class Tensor:
    """
    n-dimensional float array, canonical layout batch x channels x length.

    Tensors produced by differentiable ops keep references to their inputs and a closure
    that pushes the output gradient back to them.
    """

    def __init__(
        self,
        data: np.ndarray | Sequence | float,
        requires_grad: bool = False,
        *,
        dtype: type[np.floating] | None = None,
    ):
        self.data = np.array(data, dtype=dtype or _compute_dtype)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None
        self.op = "leaf"

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: tuple["Tensor", ...],
        op: str,
        backward: Callable[[np.ndarray], None],
    ) -> "Tensor":
        """Wrap an op result, recording the graph edge only if an input needs gradients."""
        check_finite(data, f"{op} forward")
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.requires_grad = _grad_enabled and any(parent.requires_grad for parent in parents)
        out._parents = parents if out.requires_grad else ()
        out._backward = backward if out.requires_grad else None
        out.op = op
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        """Same values, cut from the graph"""
        out = Tensor.__new__(Tensor)
        out.data = self.data
        out.grad = None
        out.requires_grad = False
        out._parents = ()
        out._backward = None
        out.op = "detach"
        return out

    def accumulate_grad(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype)
        else:
            self.grad += grad

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0.0)

    def _topological_order(self) -> list["Tensor"]:
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self, grad: np.ndarray | None = None) -> None:
        """
        Backpropagate from this tensor.

        Args:
            grad: Seed gradient; defaults to ones for a single-element tensor
        """
        if grad is None:
            if self.size != 1:
                raise ValueError("backward() without a seed gradient needs a scalar tensor")
            grad = np.ones_like(self.data)
        if not self.requires_grad:
            return
        self.accumulate_grad(np.asarray(grad, dtype=self.data.dtype))
        for node in reversed(self._topological_order()):
            if node._backward is None or node.grad is None:
                continue
            check_finite(node.grad, f"{node.op} backward")
            node._backward(node.grad)
            # interior buffers are no longer needed once pushed to the inputs
            node.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"


@dataclass
class Parameter:
    """Named trainable tensor plus its RMSprop mean-square accumulator"""

    name: str
    tensor: Tensor
    optimizer_state: np.ndarray | None = None

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    @property
    def grad(self) -> np.ndarray | None:
        return self.tensor.grad


def parameter(name: str, data: np.ndarray) -> Parameter:
    return Parameter(name=name, tensor=Tensor(data, requires_grad=True))
