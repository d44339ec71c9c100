"""
Test-time fine-tuning on a single noisy image
=============================================

The core idea: the pretrained net's own output ("pseudo clean" image) is a
usable training target. Freeze that output once, then take a few gradient
steps on (transform it, re-noise it, ask the net to undo the noise). On
images with repeated content this adapts the net to the image at hand and
beats the plain feed-forward result.

Run 03_train_small_denoiser.py first to produce the checkpoint.
"""

from pathlib import Path

import numpy as np

from rfrdenoise import (
    FinetuneConfig,
    GaussianKnown,
    add_awgn,
    load_checkpoint,
    psnr,
    pseudo_clean,
    rfr_finetune_snapshots,
)
from rfrdenoise.data import make_recurrence_layout
from rfrdenoise.selfsim import make_recurrence_image

CKPT = Path(__file__).parent / "_out" / "small_denoiser.rfrd"
if not CKPT.exists():
    raise SystemExit("run 03_train_small_denoiser.py first")
net = load_checkpoint(CKPT)

SIGMA = 25 / 255

# a test image with strong self-similarity: one patch repeated 25 times
layout = make_recurrence_layout(25, np.random.default_rng(0))
clean = make_recurrence_image(layout)
noisy = add_awgn(clean, SIGMA, np.random.default_rng(1))
print(f"noisy input: {psnr(np.clip(noisy, 0, 1), clean):.2f} dB")

# the frozen target the fine-tuning loop trains against
x_tilde = pseudo_clean(net, noisy)
print(f"pseudo-clean target: {psnr(np.clip(x_tilde, 0, 1), clean):.2f} dB")

# one fine-tuning pass, snapshotting the output at several step counts;
# step 0 is exactly the feed-forward baseline
cfg = FinetuneConfig(iters=40, lr=1e-5, noise=GaussianKnown(SIGMA), seed=0)
snaps = rfr_finetune_snapshots(net, noisy, cfg, [0, 10, 20, 40])
for m in (0, 10, 20, 40):
    print(f"after {m:2d} steps: {psnr(np.clip(snaps[m], 0, 1), clean):.2f} dB")
