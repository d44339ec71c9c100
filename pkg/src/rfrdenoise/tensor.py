"""Dense NCHW tensor ops with hand-derived gradients.

Everything the denoiser needs: same-size 2-D convolution (zero or circular
padding), ReLU, and the two training losses. Forward and backward are plain
numpy; backward accumulates into explicit gradient buffers so the optimizer
can consume them in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

ZERO = "zero"
CIRCULAR = "circular"
PADDING_MODES = (ZERO, CIRCULAR)


class ShapeError(ValueError):
    """Raised when operand shapes disagree; message names the dimension."""


@dataclass
class Tensor:
    """N x C x H x W array with an optional gradient buffer."""

    data: np.ndarray
    grad: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.data.ndim != 4:
            raise ShapeError(f"tensor must be 4-D NCHW, got ndim={self.data.ndim}")

    @property
    def shape(self):
        return self.data.shape


@dataclass
class ConvParams:
    """One conv layer's weights/bias plus their gradient accumulators.

    weight is (out_ch, in_ch, k, k) with k odd; bias is (out_ch,).
    Gradient buffers are only reset by zero_grad(), never implicitly.
    """

    weight: np.ndarray
    bias: np.ndarray
    weight_grad: np.ndarray = field(default=None)
    bias_grad: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.weight.ndim != 4 or self.weight.shape[2] != self.weight.shape[3]:
            raise ShapeError(f"weight must be (out,in,k,k), got {self.weight.shape}")
        if self.weight.shape[2] % 2 != 1:
            raise ShapeError(f"kernel size must be odd, got {self.weight.shape[2]}")
        if self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(
                f"bias shape {self.bias.shape} != out_ch ({self.weight.shape[0]},)"
            )
        if self.weight_grad is None:
            self.weight_grad = np.zeros_like(self.weight)
        if self.bias_grad is None:
            self.bias_grad = np.zeros_like(self.bias)

    @property
    def out_ch(self):
        return self.weight.shape[0]

    @property
    def in_ch(self):
        return self.weight.shape[1]

    @property
    def kernel(self):
        return self.weight.shape[2]

    def zero_grad(self):
        self.weight_grad[...] = 0
        self.bias_grad[...] = 0


def _check_padding(padding: str):
    if padding not in PADDING_MODES:
        raise ValueError(f"padding must be one of {PADDING_MODES}, got {padding!r}")


def _pad(x: np.ndarray, p: int, padding: str) -> np.ndarray:
    if p == 0:
        return x
    mode = "constant" if padding == ZERO else "wrap"
    return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)), mode=mode)


def conv2d_forward(input: Tensor, params: ConvParams, padding: str = ZERO) -> Tensor:
    """Same-size cross-correlation of input with params.weight, plus bias."""
    _check_padding(padding)
    x = input.data
    if x.shape[1] != params.in_ch:
        raise ShapeError(
            f"input channels {x.shape[1]} != weight in_ch {params.in_ch}"
        )
    k = params.kernel
    p = (k - 1) // 2
    padded = _pad(x, p, padding)
    # (N, C, H, W, k, k) view over the padded array
    cols = sliding_window_view(padded, (k, k), axis=(2, 3))
    out = np.tensordot(cols, params.weight, axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + params.bias[None, :, None, None]
    return Tensor(np.ascontiguousarray(out))


def _fold_padding(dpad: np.ndarray, p: int, padding: str) -> np.ndarray:
    """Collapse gradient on the padded frame back onto the H x W grid."""
    if p == 0:
        return dpad
    h = dpad.shape[2] - 2 * p
    w = dpad.shape[3] - 2 * p
    if padding == ZERO:
        return dpad[:, :, p : p + h, p : p + w]
    # circular: wrap pad-border gradient back onto the rows/cols it aliases
    dpad = dpad.copy()
    dpad[:, :, h : h + p, :] += dpad[:, :, 0:p, :]
    dpad[:, :, p : 2 * p, :] += dpad[:, :, h + p : h + 2 * p, :]
    core_rows = dpad[:, :, p : p + h, :]
    core_rows[:, :, :, w : w + p] += core_rows[:, :, :, 0:p]
    core_rows[:, :, :, p : 2 * p] += core_rows[:, :, :, w + p : w + 2 * p]
    return core_rows[:, :, :, p : p + w]


def conv2d_backward(
    input: Tensor, params: ConvParams, grad_out: Tensor, padding: str = ZERO
) -> Tensor:
    """Backprop through conv2d_forward.

    Returns the gradient w.r.t. the input and accumulates (+=) into
    params.weight_grad / params.bias_grad.
    """
    _check_padding(padding)
    x = input.data
    g = grad_out.data
    expected = (x.shape[0], params.out_ch, x.shape[2], x.shape[3])
    if g.shape != expected:
        raise ShapeError(f"grad_out shape {g.shape} != forward output {expected}")
    k = params.kernel
    p = (k - 1) // 2
    padded = _pad(x, p, padding)
    cols = sliding_window_view(padded, (k, k), axis=(2, 3))

    params.bias_grad += g.sum(axis=(0, 2, 3))
    params.weight_grad += np.tensordot(g, cols, axes=([0, 2, 3], [0, 2, 3]))

    # scatter grad back through the sliding windows, fixed (i, j) loop order
    dcols = np.tensordot(g, params.weight, axes=([1], [0]))  # (N, H, W, C, k, k)
    dcols = dcols.transpose(0, 3, 1, 2, 4, 5)
    n, c, h, w = x.shape
    dpad = np.zeros((n, c, h + 2 * p, w + 2 * p), dtype=x.dtype)
    for i in range(k):
        for j in range(k):
            dpad[:, :, i : i + h, j : j + w] += dcols[:, :, :, :, i, j]
    return Tensor(_fold_padding(dpad, p, padding))


def relu_forward(input: Tensor) -> Tensor:
    return Tensor(np.maximum(input.data, 0))


def relu_backward(input: Tensor, grad_out: Tensor) -> Tensor:
    if grad_out.data.shape != input.data.shape:
        raise ShapeError(
            f"grad_out shape {grad_out.data.shape} != input {input.data.shape}"
        )
    # subgradient 0 at exactly 0
    return Tensor(np.where(input.data > 0, grad_out.data, 0))


def _check_pair(pred: Tensor, target: Tensor):
    if pred.data.shape != target.data.shape:
        raise ShapeError(
            f"pred shape {pred.data.shape} != target {target.data.shape}"
        )


def mse_loss(pred: Tensor, target: Tensor):
    """Mean squared error over all elements; returns (loss, dloss/dpred)."""
    _check_pair(pred, target)
    diff = pred.data - target.data
    loss = float(np.mean(diff * diff))
    grad = (2.0 / diff.size) * diff
    return loss, Tensor(grad)


def l1_loss(pred: Tensor, target: Tensor):
    """Mean absolute error; subgradient sign(0) = 0."""
    _check_pair(pred, target)
    diff = pred.data - target.data
    loss = float(np.mean(np.abs(diff)))
    grad = np.sign(diff) / diff.size
    return loss, Tensor(grad)
