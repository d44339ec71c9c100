"""Test-time fine-tuning on a single noisy image.

The baseline net's own output on the test image becomes a fixed pseudo-clean
target. Each iteration corrupts a (optionally dihedral-transformed) copy of
that target with fresh noise, takes one gradient step toward reproducing the
target, and after M steps the adapted net denoises the original input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import noise as noise_mod
from .net import DenoiserNet, backward, denoise, forward, image_to_tensor
from .noise import NoiseSpec
from .optim import AdamState, adam_step, sgd_step
from .tensor import Tensor, l1_loss, mse_loss

# The 8 dihedral grid symmetries, encoded as (quarter-turns, flip-last-axis).
N_TRANSFORMS = 8


def apply_transform(image: np.ndarray, t: int) -> np.ndarray:
    """Apply dihedral transform t in 0..7 to an H x W x C image."""
    rot, flip = t % 4, t >= 4
    out = np.rot90(image, rot, axes=(0, 1))
    if flip:
        out = out[:, ::-1]
    return np.ascontiguousarray(out)


def invert_transform(image: np.ndarray, t: int) -> np.ndarray:
    rot, flip = t % 4, t >= 4
    out = image[:, ::-1] if flip else image
    return np.ascontiguousarray(np.rot90(out, -rot, axes=(0, 1)))


@dataclass(frozen=True)
class FinetuneConfig:
    iters: int = 40
    lr: float = 1e-5
    loss: str = "l2"  # "l2" | "l1"
    noise: NoiseSpec = field(default_factory=lambda: noise_mod.GaussianBlind(0, 50 / 255))
    augment: bool = True
    seed: int = 0
    optimizer: str = "adam"  # "adam" | "sgd"

    def __post_init__(self):
        if self.iters < 0:
            raise ValueError(f"iters must be >= 0, got {self.iters}")
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.loss not in ("l2", "l1"):
            raise ValueError(f"loss must be 'l2' or 'l1', got {self.loss!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd'")


def pseudo_clean(net: DenoiserNet, noisy: np.ndarray) -> np.ndarray:
    """The fixed fine-tuning target: the baseline net's output on the input."""
    return denoise(net, noisy)


def rfr_loss_step(
    net: DenoiserNet,
    x_tilde: np.ndarray,
    cfg: FinetuneConfig,
    rng: np.random.Generator,
) -> float:
    """One loss evaluation + backward pass. Gradients must be zeroed before.

    Draws a transform (when augmenting) and a fresh noise realization, then
    pushes the corrupted target through the net against the transformed
    target. Returns the scalar loss.
    """
    t = int(rng.integers(N_TRANSFORMS)) if cfg.augment else 0
    target = apply_transform(x_tilde, t)
    noisy_in = noise_mod.realize(target, cfg.noise, rng)
    out, cache = forward(net, image_to_tensor(noisy_in))
    loss_fn = mse_loss if cfg.loss == "l2" else l1_loss
    loss, grad = loss_fn(out, image_to_tensor(target))
    backward(net, cache, grad)
    return loss


def rfr_finetune(
    net: DenoiserNet,
    noisy: np.ndarray,
    cfg: FinetuneConfig,
) -> Tuple[DenoiserNet, np.ndarray, List[float]]:
    """Fine-tune a clone of net on one noisy image; the input net is untouched.

    Computes the pseudo-clean target once, runs cfg.iters update steps, and
    returns (adapted net, its output on the noisy image, per-step losses).
    With iters=0 the output is exactly the pseudo-clean image.
    """
    tuned, snaps, losses = _run_finetune(net, noisy, cfg, [cfg.iters])
    return tuned, snaps[cfg.iters], losses


def rfr_finetune_snapshots(
    net: DenoiserNet,
    noisy: np.ndarray,
    cfg: FinetuneConfig,
    snapshot_iters: List[int],
) -> Dict[int, np.ndarray]:
    """Denoised outputs after each iteration count in snapshot_iters.

    One pass over max(snapshot_iters) steps; bit-identical to separate runs
    at each count because the per-step RNG stream depends only on the seed
    and the step index.
    """
    _, snaps, _ = _run_finetune(net, noisy, cfg, snapshot_iters)
    return snaps


def _run_finetune(net, noisy, cfg, snapshot_iters):
    tuned = net.clone()
    x_tilde = pseudo_clean(net, noisy)
    rng = np.random.default_rng(cfg.seed)
    state = AdamState.for_net(tuned, lr=cfg.lr) if cfg.optimizer == "adam" else None

    wanted = sorted(set(snapshot_iters))
    total = max(wanted)
    snaps: Dict[int, np.ndarray] = {}
    losses: List[float] = []
    if 0 in wanted:
        snaps[0] = x_tilde.copy()
    for i in range(total):
        tuned.zero_grad()
        losses.append(rfr_loss_step(tuned, x_tilde, cfg, rng))
        if state is not None:
            adam_step(tuned, state)
        else:
            sgd_step(tuned, cfg.lr)
        if (i + 1) in wanted:
            snaps[i + 1] = denoise(tuned, noisy)
    return tuned, snaps, losses
