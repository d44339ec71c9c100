"""
Patch recurrence and the sigma^2/k averaging law
================================================

Builds an image where one patch repeats k times on a grid, corrupts it with
AWGN, and averages the k noisy copies. Independent noise averages down as
sigma^2/k, so PSNR should climb about 10*log10(k) dB over a single copy.
No network involved yet -- this is the statistical ceiling the denoiser
demos build on.
"""

import numpy as np

from rfrdenoise import add_awgn, average_recurring_patches
from rfrdenoise.data import make_recurrence_layout
from rfrdenoise.selfsim import make_recurrence_image

SIGMA = 25 / 255

print(" k   copies-avg PSNR   single-copy PSNR   gain    10log10(k)")
for k in (1, 4, 9, 16, 25):
    before_all, after_all = [], []
    for seed in range(5):
        # same patch content across k: only the copy count changes
        layout = make_recurrence_layout(k, np.random.default_rng([7, seed]),
                                        canvas_size=160)
        clean = make_recurrence_image(layout)
        noisy = add_awgn(clean, SIGMA, np.random.default_rng([8, k, seed]))
        _, before, after = average_recurring_patches(noisy, layout)
        before_all.append(before)
        after_all.append(after)
    b, a = np.mean(before_all), np.mean(after_all)
    print(f"{k:2d}   {a:13.2f}   {b:16.2f}   {a - b:5.2f}   {10 * np.log10(k):8.2f}")
