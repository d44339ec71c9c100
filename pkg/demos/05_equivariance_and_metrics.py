"""
Shift equivariance and the quality metrics
==========================================

A pure convolutional net commutes with translation -- exactly so with
circular padding, and away from the borders with zero padding. This script
measures that with equivariance_report, then exercises the PSNR/SSIM
closed forms used throughout the tests.
"""

import numpy as np

from rfrdenoise import NetConfig, init_net, psnr, ssim
from rfrdenoise.selfsim import equivariance_report
from rfrdenoise.data import make_texture

img = make_texture(96, np.random.default_rng(0))
shifts = [(1, 0), (0, 3), (7, 5)]

for padding in ("circular", "zero"):
    net = init_net(NetConfig(padding=padding), seed=1)
    report = equivariance_report(net, img, shifts)
    worst = max(v for _, v in report)
    print(f"{padding:8s} padding: worst |shifted-output mismatch| = {worst:.2e}")

# PSNR closed forms: a constant error of d against peak 1 gives
# 10*log10(1/d^2) dB.
base = np.zeros((32, 32, 1))
print(f"psnr at uniform diff 0.1: {psnr(base + 0.1, base):.6f} dB (expect 20)")
print(f"psnr at uniform diff 0.5: {psnr(base + 0.5, base):.6f} dB (expect ~6.0206)")

a = np.random.default_rng(2).random((64, 64, 1))
print(f"ssim(a, a)           = {ssim(a, a):.3f}")
print(f"ssim(a, a + noise)   = {ssim(a, np.clip(a + 0.1 * np.random.default_rng(3).standard_normal(a.shape), 0, 1)):.3f}")
