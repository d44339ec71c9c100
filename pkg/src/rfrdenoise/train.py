"""Gaussian pre-training of the baseline denoiser.

Random crops from a clean corpus, dihedral augmentation, blind-sigma AWGN
corruption, L1 loss, Adam with cosine learning-rate decay.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .engine import N_TRANSFORMS, apply_transform
from .net import DenoiserNet, NetConfig, backward, forward, init_net
from .noise import GaussianBlind, add_awgn, sample_sigma
from .optim import AdamState, adam_step, cosine_lr
from .tensor import Tensor, l1_loss, mse_loss


@dataclass(frozen=True)
class PretrainConfig:
    steps: int = 2000
    batch: int = 4
    crop: int = 48
    lr_start: float = 1e-4
    lr_end: float = 1e-6
    sigma: GaussianBlind = field(default_factory=lambda: GaussianBlind(0.0, 50 / 255))
    loss: str = "l1"
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1 or self.batch < 1 or self.crop < 1:
            raise ValueError("steps, batch and crop must be positive")
        if self.loss not in ("l1", "l2"):
            raise ValueError(f"loss must be 'l1' or 'l2', got {self.loss!r}")


def _sample_batch(images, cfg: PretrainConfig, rng) -> Tuple[np.ndarray, np.ndarray]:
    """Stack of (noisy, clean) crops in NCHW order."""
    clean = []
    noisy = []
    for _ in range(cfg.batch):
        img = images[rng.integers(len(images))]
        h, w = img.shape[:2]
        y = int(rng.integers(h - cfg.crop + 1))
        x = int(rng.integers(w - cfg.crop + 1))
        crop = img[y : y + cfg.crop, x : x + cfg.crop]
        crop = apply_transform(crop, int(rng.integers(N_TRANSFORMS)))
        sigma = sample_sigma(cfg.sigma, rng)
        clean.append(crop.transpose(2, 0, 1))
        noisy.append(add_awgn(crop, sigma, rng).transpose(2, 0, 1))
    return np.stack(noisy), np.stack(clean)


def pretrain(
    images: List[np.ndarray],
    net_config: NetConfig,
    cfg: PretrainConfig,
) -> Tuple[DenoiserNet, List[float]]:
    """Train a fresh net on the corpus; returns (net, per-step losses)."""
    if not images:
        raise ValueError("empty training corpus")
    for img in images:
        if img.shape[2] != net_config.in_channels:
            raise ValueError(
                f"corpus image has {img.shape[2]} channels, net expects "
                f"{net_config.in_channels}"
            )
        if min(img.shape[:2]) < cfg.crop:
            raise ValueError(f"image {img.shape[:2]} smaller than crop {cfg.crop}")
    net = init_net(net_config, cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    state = AdamState.for_net(net, lr=cfg.lr_start)
    loss_fn = l1_loss if cfg.loss == "l1" else mse_loss
    losses = []
    for step in range(cfg.steps):
        noisy, clean = _sample_batch(images, cfg, rng)
        net.zero_grad()
        out, cache = forward(net, Tensor(noisy.astype(np.float32)))
        loss, grad = loss_fn(out, Tensor(clean.astype(np.float32)))
        backward(net, cache, grad)
        state.lr = cosine_lr(step, cfg.steps, cfg.lr_start, cfg.lr_end)
        adam_step(net, state)
        losses.append(loss)
    return net, losses


def load_corpus(directory, channels: int = 1) -> Tuple[List[np.ndarray], List[str]]:
    """All PNGs in a directory, sorted by name."""
    from .data import load_image

    paths = sorted(Path(directory).glob("*.png"))
    if not paths:
        raise ValueError(f"no PNG images found in {directory}")
    images = []
    for p in paths:
        img = load_image(p)
        if channels == 1 and img.shape[2] == 3:
            img = img.mean(axis=2, keepdims=True).astype(np.float32)
        images.append(img)
    return images, [p.stem for p in paths]
