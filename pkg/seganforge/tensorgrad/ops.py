"""Differentiable operations used by the SEGAN generator and discriminator.

The set is closed: convolution, transposed convolution, PReLU, LeakyReLU, tanh, channel
concatenation, addition, scalar scaling, reshape and the two mean-reduced losses.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from seganforge.exceptions import ShapeError
from seganforge.tensorgrad.tensor import Tensor


def conv1d_output_length(length: int, kernel: int, stride: int, pad: int) -> int:
    return (length + 2 * pad - kernel) // stride + 1


def conv_transpose1d_output_length(
    length: int, kernel: int, stride: int, pad: int, output_padding: int = 0
) -> int:
    return (length - 1) * stride - 2 * pad + kernel + output_padding


def _windows(x: np.ndarray, kernel: int, stride: int, count: int) -> np.ndarray:
    """[B, C, Lp] -> [B, C, count, kernel] strided view"""
    return sliding_window_view(x, kernel, axis=2)[:, :, : (count - 1) * stride + 1 : stride, :]


def conv1d(x: Tensor, w: Tensor, b: Tensor, stride: int = 1, pad: int = 0) -> Tensor:
    """Cross-correlation of x [B, Cin, L] with w [Cout, Cin, K], zero padding, bias b [Cout]."""
    if x.data.ndim != 3 or w.data.ndim != 3:
        raise ShapeError(f"conv1d expects 3-d input and weight, got {x.shape} and {w.shape}")
    batch, c_in, length = x.shape
    c_out, w_in, kernel = w.shape
    if w_in != c_in:
        raise ShapeError(f"conv1d channel mismatch | input={c_in} | weight={w_in}")
    if b.shape != (c_out,):
        raise ShapeError(f"conv1d bias shape {b.shape} does not match {c_out} output channels")
    if stride < 1 or pad < 0:
        raise ShapeError(f"conv1d needs stride >= 1 and pad >= 0, got {stride}, {pad}")
    if kernel > length + 2 * pad:
        raise ShapeError(f"conv1d kernel {kernel} longer than padded input {length + 2 * pad}")

    l_out = conv1d_output_length(length, kernel, stride, pad)
    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad)))
    cols = _windows(xp, kernel, stride, l_out).transpose(0, 2, 1, 3).reshape(batch * l_out, c_in * kernel)
    w2 = w.data.reshape(c_out, c_in * kernel)
    out = (cols @ w2.T).reshape(batch, l_out, c_out).transpose(0, 2, 1) + b.data[None, :, None]

    def backward(grad: np.ndarray) -> None:
        g2 = grad.transpose(0, 2, 1).reshape(batch * l_out, c_out)
        if w.requires_grad:
            w.accumulate_grad((g2.T @ cols).reshape(c_out, c_in, kernel))
        if b.requires_grad:
            b.accumulate_grad(grad.sum(axis=(0, 2)))
        if x.requires_grad:
            dcols = (g2 @ w2).reshape(batch, l_out, c_in, kernel).transpose(0, 2, 1, 3)
            dxp = np.zeros_like(xp)
            span = (l_out - 1) * stride + 1
            for k in range(kernel):
                dxp[:, :, k : k + span : stride] += dcols[:, :, :, k]
            x.accumulate_grad(dxp[:, :, pad : pad + length])

    return Tensor.from_op(np.ascontiguousarray(out), (x, w, b), "conv1d", backward)


def conv_transpose1d(
    x: Tensor, w: Tensor, b: Tensor, stride: int = 1, pad: int = 0, output_padding: int = 0
) -> Tensor:
    """
    Fractional-strided convolution of x [B, Cin, L] with w [Cin, Cout, K].

    Output length is (L - 1) * stride - 2 * pad + K + output_padding; the extra
    ``output_padding`` samples are appended at the end of the signal.
    """
    if x.data.ndim != 3 or w.data.ndim != 3:
        raise ShapeError(f"conv_transpose1d expects 3-d input and weight, got {x.shape} and {w.shape}")
    batch, c_in, length = x.shape
    w_in, c_out, kernel = w.shape
    if w_in != c_in:
        raise ShapeError(f"conv_transpose1d channel mismatch | input={c_in} | weight={w_in}")
    if b.shape != (c_out,):
        raise ShapeError(f"conv_transpose1d bias shape {b.shape} does not match {c_out} channels")
    if stride < 1 or pad < 0 or not 0 <= output_padding < max(stride, 2):
        raise ShapeError(
            f"conv_transpose1d invalid stride/pad/output_padding {stride}/{pad}/{output_padding}"
        )
    l_out = conv_transpose1d_output_length(length, kernel, stride, pad, output_padding)
    if l_out <= 0:
        raise ShapeError(f"conv_transpose1d output length {l_out} is not positive")

    full_len = (length - 1) * stride + kernel + output_padding
    span = (length - 1) * stride + 1
    x2 = x.data.transpose(0, 2, 1).reshape(batch * length, c_in)
    w2 = w.data.reshape(c_in, c_out * kernel)
    contrib = (x2 @ w2).reshape(batch, length, c_out, kernel).transpose(0, 2, 1, 3)
    full = np.zeros((batch, c_out, full_len), dtype=contrib.dtype)
    for k in range(kernel):
        full[:, :, k : k + span : stride] += contrib[:, :, :, k]
    out = full[:, :, pad : pad + l_out] + b.data[None, :, None]

    def backward(grad: np.ndarray) -> None:
        g_full = np.zeros((batch, c_out, full_len), dtype=grad.dtype)
        g_full[:, :, pad : pad + l_out] = grad
        gcols = _windows(g_full, kernel, stride, length).transpose(0, 2, 1, 3)
        gcols = gcols.reshape(batch * length, c_out * kernel)
        if w.requires_grad:
            w.accumulate_grad((x2.T @ gcols).reshape(c_in, c_out, kernel))
        if b.requires_grad:
            b.accumulate_grad(grad.sum(axis=(0, 2)))
        if x.requires_grad:
            x.accumulate_grad((gcols @ w2.T).reshape(batch, length, c_in).transpose(0, 2, 1))

    return Tensor.from_op(np.ascontiguousarray(out), (x, w, b), "conv_transpose1d", backward)


def prelu(x: Tensor, alpha: Tensor) -> Tensor:
    """y = x for x > 0, alpha_c * x otherwise, with a learnable slope per channel."""
    if x.data.ndim != 3 or alpha.shape != (x.shape[1],):
        raise ShapeError(f"prelu alpha shape {alpha.shape} does not match input {x.shape}")
    positive = x.data > 0
    slope = alpha.data[None, :, None]
    out = np.where(positive, x.data, slope * x.data)

    def backward(grad: np.ndarray) -> None:
        if x.requires_grad:
            x.accumulate_grad(np.where(positive, grad, slope * grad))
        if alpha.requires_grad:
            alpha.accumulate_grad(np.where(positive, 0.0, grad * x.data).sum(axis=(0, 2)))

    return Tensor.from_op(out, (x, alpha), "prelu", backward)


def leaky_relu(x: Tensor, slope: float) -> Tensor:
    positive = x.data > 0
    out = np.where(positive, x.data, slope * x.data)

    def backward(grad: np.ndarray) -> None:
        x.accumulate_grad(np.where(positive, grad, slope * grad))

    return Tensor.from_op(out, (x,), "leaky_relu", backward)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def backward(grad: np.ndarray) -> None:
        x.accumulate_grad(grad * (1.0 - out * out))

    return Tensor.from_op(out, (x,), "tanh", backward)


def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    """[B, Ca, L] ++ [B, Cb, L] -> [B, Ca + Cb, L]"""
    if a.data.ndim != 3 or b.data.ndim != 3 or a.shape[0] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ShapeError(f"concat_channels needs matching batch and length, got {a.shape} and {b.shape}")
    split = a.shape[1]
    out = np.concatenate([a.data, b.data], axis=1)

    def backward(grad: np.ndarray) -> None:
        a.accumulate_grad(grad[:, :split])
        b.accumulate_grad(grad[:, split:])

    return Tensor.from_op(out, (a, b), "concat_channels", backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"add needs equal shapes, got {a.shape} and {b.shape}")

    def backward(grad: np.ndarray) -> None:
        a.accumulate_grad(grad)
        b.accumulate_grad(grad)

    return Tensor.from_op(a.data + b.data, (a, b), "add", backward)


def scale(x: Tensor, factor: float) -> Tensor:
    def backward(grad: np.ndarray) -> None:
        x.accumulate_grad(grad * factor)

    return Tensor.from_op(x.data * x.data.dtype.type(factor), (x,), "scale", backward)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    original = x.shape
    try:
        out = x.data.reshape(shape)
    except ValueError as exc:
        raise ShapeError(f"cannot reshape {original} to {shape}") from exc

    def backward(grad: np.ndarray) -> None:
        x.accumulate_grad(grad.reshape(original))

    return Tensor.from_op(out, (x,), "reshape", backward)


def l1_loss(a: Tensor, b: Tensor) -> Tensor:
    """mean |a - b| as a scalar tensor"""
    if a.shape != b.shape:
        raise ShapeError(f"l1_loss needs equal shapes, got {a.shape} and {b.shape}")
    diff = a.data - b.data
    count = diff.size
    out = np.array(np.abs(diff).mean(), dtype=diff.dtype)

    def backward(grad: np.ndarray) -> None:
        g = np.sign(diff) * (grad / count)
        a.accumulate_grad(g)
        b.accumulate_grad(-g)

    return Tensor.from_op(out, (a, b), "l1_loss", backward)


def mse_loss(a: Tensor, b: Tensor) -> Tensor:
    """mean (a - b)^2 as a scalar tensor"""
    if a.shape != b.shape:
        raise ShapeError(f"mse_loss needs equal shapes, got {a.shape} and {b.shape}")
    diff = a.data - b.data
    count = diff.size
    out = np.array(np.square(diff).mean(), dtype=diff.dtype)

    def backward(grad: np.ndarray) -> None:
        g = diff * (2.0 * grad / count)
        a.accumulate_grad(g)
        b.accumulate_grad(-g)

    return Tensor.from_op(out, (a, b), "mse_loss", backward)
