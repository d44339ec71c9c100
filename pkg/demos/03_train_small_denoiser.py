"""
Training a small blind Gaussian denoiser from scratch
=====================================================

Pretrains a residual conv net on procedural textures with blind AWGN
(sigma drawn in [0, 50]/255 per crop), then checks it on a held-out image.
Everything runs on the CPU in numpy; the run is sized to finish in about a
minute, so expect a modest but clearly visible PSNR gain.

The checkpoint lands in demos/_out/ and is reused by 04_rfr_walkthrough.py.
"""

from pathlib import Path

import numpy as np

from rfrdenoise import NetConfig, PretrainConfig, add_awgn, denoise, pretrain, psnr
from rfrdenoise import save_checkpoint
from rfrdenoise.data import make_texture

OUT = Path(__file__).parent / "_out"
OUT.mkdir(exist_ok=True)

# training corpus: 8 synthetic textures; held-out image uses a fresh seed
train_images = [make_texture(160, np.random.default_rng([10, i])) for i in range(8)]
test_image = make_texture(160, np.random.default_rng(99))

cfg = PretrainConfig(steps=400, batch=4, crop=48, seed=0)
net, losses = pretrain(train_images, NetConfig(), cfg)

print(f"loss: first 10 steps {np.mean(losses[:10]):.4f} -> "
      f"last 10 steps {np.mean(losses[-10:]):.4f}")

for sigma255 in (15, 25, 50):
    noisy = np.clip(add_awgn(test_image, sigma255 / 255,
                             np.random.default_rng([11, sigma255])), 0, 1)
    restored = np.clip(denoise(net, noisy), 0, 1)
    print(f"sigma={sigma255:2d}: noisy {psnr(noisy, test_image):5.2f} dB "
          f"-> denoised {psnr(restored, test_image):5.2f} dB")

path = OUT / "small_denoiser.rfrd"
save_checkpoint(net, path)
print(f"saved checkpoint to {path}")
