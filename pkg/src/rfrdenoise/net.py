"""Residual fully-convolutional denoiser: build, run, serialize.

The network is a plain conv/ReLU stack. With residual=True the stack
predicts the noise and the output is input minus that prediction. No
normalization layers and no clamping anywhere inside the network.
"""

from __future__ import annotations

import copy
import struct
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .tensor import (
    CIRCULAR,
    PADDING_MODES,
    ZERO,
    ConvParams,
    ShapeError,
    Tensor,
    conv2d_backward,
    conv2d_forward,
    relu_backward,
    relu_forward,
)

CHECKPOINT_MAGIC = b"RFRD"
CHECKPOINT_VERSION = 1


class CheckpointError(IOError):
    pass


class BadMagicError(CheckpointError):
    pass


class VersionMismatchError(CheckpointError):
    pass


class TruncatedPayloadError(CheckpointError):
    pass


@dataclass(frozen=True)
class NetConfig:
    depth: int = 8
    width: int = 32
    kernel: int = 3
    in_channels: int = 1
    padding: str = ZERO
    residual: bool = True

    def __post_init__(self):
        if self.depth < 2:
            raise ValueError(f"depth must be >= 2, got {self.depth}")
        if self.kernel % 2 != 1 or self.kernel < 1:
            raise ValueError(f"kernel must be odd and positive, got {self.kernel}")
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if self.in_channels not in (1, 3):
            raise ValueError(f"in_channels must be 1 or 3, got {self.in_channels}")
        if self.padding not in PADDING_MODES:
            raise ValueError(f"padding must be one of {PADDING_MODES}")


@dataclass
class DenoiserNet:
    config: NetConfig
    layers: List[ConvParams]

    def clone(self) -> "DenoiserNet":
        return copy.deepcopy(self)

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()

    def parameters(self):
        """Fixed iteration order: per layer, weight then bias."""
        for layer in self.layers:
            yield layer.weight, layer.weight_grad
            yield layer.bias, layer.bias_grad


def _layer_channels(cfg: NetConfig):
    chans = [cfg.in_channels] + [cfg.width] * (cfg.depth - 1) + [cfg.in_channels]
    return list(zip(chans[:-1], chans[1:]))


def init_net(config: NetConfig, seed: int, dtype=np.float32) -> DenoiserNet:
    """He-style init: weights ~ N(0, 2/(in_ch*k^2)), biases zero."""
    rng = np.random.default_rng(seed)
    layers = []
    for in_ch, out_ch in _layer_channels(config):
        std = np.sqrt(2.0 / (in_ch * config.kernel**2))
        w = rng.normal(0.0, std, size=(out_ch, in_ch, config.kernel, config.kernel))
        layers.append(
            ConvParams(
                weight=w.astype(dtype),
                bias=np.zeros(out_ch, dtype=dtype),
            )
        )
    return DenoiserNet(config=config, layers=layers)


def forward(net: DenoiserNet, x: Tensor):
    """Run the net, keeping the per-layer inputs needed by backward().

    Returns (output, cache). Residual mode subtracts the stack output
    from the input.
    """
    if x.data.shape[1] != net.config.in_channels:
        raise ShapeError(
            f"input channels {x.data.shape[1]} != net in_channels "
            f"{net.config.in_channels}"
        )
    pad = net.config.padding
    acts = [x]  # input to each conv layer
    pre = []  # pre-activation outputs of all but the last conv
    a = x
    last = len(net.layers) - 1
    for i, layer in enumerate(net.layers):
        z = conv2d_forward(a, layer, pad)
        if i < last:
            pre.append(z)
            a = relu_forward(z)
            acts.append(a)
        else:
            a = z
    out = Tensor(x.data - a.data) if net.config.residual else a
    return out, (acts, pre)


def backward(net: DenoiserNet, cache, grad_out: Tensor) -> Tensor:
    """Accumulate parameter gradients; returns grad w.r.t. the input."""
    acts, pre = cache
    pad = net.config.padding
    sign = -1.0 if net.config.residual else 1.0
    g = Tensor(sign * grad_out.data)
    for i in range(len(net.layers) - 1, -1, -1):
        g = conv2d_backward(acts[i], net.layers[i], g, pad)
        if i > 0:
            g = relu_backward(pre[i - 1], g)
    if net.config.residual:
        g = Tensor(g.data + grad_out.data)
    return g


def image_to_tensor(image: np.ndarray) -> Tensor:
    """H x W x C float image -> 1 x C x H x W tensor (no copy avoidance)."""
    if image.ndim == 2:
        image = image[:, :, None]
    return Tensor(np.ascontiguousarray(image.transpose(2, 0, 1)[None]))

def tensor_to_image(t: Tensor) -> np.ndarray:
    return np.ascontiguousarray(t.data[0].transpose(1, 2, 0))


def denoise(net: DenoiserNet, image: np.ndarray) -> np.ndarray:
    """One forward pass on an H x W x C image. Output is NOT clamped."""
    out, _ = forward(net, image_to_tensor(image))
    return tensor_to_image(out)


_HEADER = struct.Struct("<4sIIIIIBB")


def save_checkpoint(net: DenoiserNet, path):
    cfg = net.config
    header = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        cfg.depth,
        cfg.width,
        cfg.kernel,
        cfg.in_channels,
        1 if cfg.padding == CIRCULAR else 0,
        1 if cfg.residual else 0,
    )
    with open(path, "wb") as f:
        f.write(header)
        for layer in net.layers:
            f.write(layer.weight.astype("<f4").tobytes())
            f.write(layer.bias.astype("<f4").tobytes())


def load_checkpoint(path) -> DenoiserNet:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < _HEADER.size or blob[:4] != CHECKPOINT_MAGIC:
        raise BadMagicError(f"bad magic in {path}")
    magic, version, depth, width, kernel, in_ch, pad_flag, res_flag = _HEADER.unpack(
        blob[: _HEADER.size]
    )
    if version != CHECKPOINT_VERSION:
        raise VersionMismatchError(
            f"checkpoint version {version} != {CHECKPOINT_VERSION}"
        )
    cfg = NetConfig(
        depth=depth,
        width=width,
        kernel=kernel,
        in_channels=in_ch,
        padding=CIRCULAR if pad_flag else ZERO,
        residual=bool(res_flag),
    )
    payload = blob[_HEADER.size :]
    layers = []
    offset = 0
    for in_c, out_c in _layer_channels(cfg):
        n_w = out_c * in_c * kernel * kernel
        need = (n_w + out_c) * 4
        if offset + need > len(payload):
            raise TruncatedPayloadError(
                f"truncated payload: need {need} bytes at offset {offset}, "
                f"have {len(payload) - offset}"
            )
        w = np.frombuffer(payload, dtype="<f4", count=n_w, offset=offset)
        offset += n_w * 4
        b = np.frombuffer(payload, dtype="<f4", count=out_c, offset=offset)
        offset += out_c * 4
        layers.append(
            ConvParams(
                weight=w.reshape(out_c, in_c, kernel, kernel).copy(),
                bias=b.copy(),
            )
        )
    if offset != len(payload):
        raise TruncatedPayloadError(
            f"payload has {len(payload) - offset} trailing bytes"
        )
    return DenoiserNet(config=cfg, layers=layers)
