"""Patch-recurrence study: build images with k exact patch copies, measure
how averaging the k denoised copies improves quality, and probe the
shift-equivariance and output-spread behavior that averaging relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .metrics import psnr
from .net import DenoiserNet, denoise


class LayoutError(ValueError):
    pass


@dataclass
class RecurrenceLayout:
    """k copies of one p x p patch stamped at known, non-overlapping spots."""

    patch: np.ndarray  # (p, p, c)
    positions: List[Tuple[int, int]]  # top-left (row, col) per copy
    canvas: np.ndarray  # (H, W, c) background

    def __post_init__(self):
        p = self.patch.shape[0]
        if self.patch.shape[1] != p:
            raise LayoutError(f"patch must be square, got {self.patch.shape[:2]}")
        h, w = self.canvas.shape[:2]
        for y, x in self.positions:
            if y < 0 or x < 0 or y + p > h or x + p > w:
                raise LayoutError(f"patch at ({y},{x}) leaves the {h}x{w} canvas")
        for i, (y1, x1) in enumerate(self.positions):
            for y2, x2 in self.positions[i + 1 :]:
                if abs(y1 - y2) < p and abs(x1 - x2) < p:
                    raise LayoutError(
                        f"patches at ({y1},{x1}) and ({y2},{x2}) overlap"
                    )

    @property
    def k(self) -> int:
        return len(self.positions)

    @property
    def patch_size(self) -> int:
        return self.patch.shape[0]


def grid_positions(k: int, patch: int, canvas: int, margin: int = 0):
    """Top-left coordinates for a sqrt(k) x sqrt(k) grid of patch slots."""
    side = int(round(np.sqrt(k)))
    if side * side != k:
        raise LayoutError(f"grid layout needs a square k, got {k}")
    pitch = (canvas - 2 * margin - patch) / max(side - 1, 1)
    if side > 1 and pitch < patch:
        raise LayoutError(f"{k} patches of size {patch} do not fit in {canvas}")
    coords = [margin + int(round(i * pitch)) for i in range(side)]
    return [(y, x) for y in coords for x in coords]


def make_recurrence_image(layout: RecurrenceLayout) -> np.ndarray:
    out = layout.canvas.copy()
    p = layout.patch_size
    for y, x in layout.positions:
        out[y : y + p, x : x + p] = layout.patch
    return out


def extract_patches(image: np.ndarray, layout: RecurrenceLayout):
    p = layout.patch_size
    h, w = image.shape[:2]
    for y, x in layout.positions:
        if y + p > h or x + p > w:
            raise LayoutError(f"layout position ({y},{x}) outside {h}x{w} image")
    return [image[y : y + p, x : x + p].copy() for y, x in layout.positions]


def average_recurring_patches(denoised: np.ndarray, layout: RecurrenceLayout):
    """Average the k denoised patch copies against the clean patch.

    Returns (avg_patch, psnr_before, psnr_after): before = mean PSNR of the
    individual copies, after = PSNR of their elementwise mean.
    """
    patches = extract_patches(denoised, layout)
    avg = np.mean(patches, axis=0).astype(denoised.dtype)
    before = float(np.mean([psnr(q, layout.patch) for q in patches]))
    after = psnr(avg, layout.patch)
    return avg, before, after


def equivariance_report(
    net: DenoiserNet, image: np.ndarray, shifts: Sequence[Tuple[int, int]]
):
    """Max |denoise(shift(x)) - shift(denoise(x))| per shift.

    Shifting is circular. With circular padding the property is exact and
    the whole image is compared. With zero padding the comparison drops a
    border of depth*(k-1)/2 pixels (the reach of the missing context) plus
    the shift width itself, since the circular shift's wrap seam injects
    content a true translation would not.
    """
    base = denoise(net, image)
    margin = 0
    if net.config.padding == "zero":
        margin = net.config.depth * (net.config.kernel - 1) // 2
    rows = []
    for dy, dx in shifts:
        shifted_out = denoise(net, np.roll(image, (dy, dx), axis=(0, 1)))
        rolled_base = np.roll(base, (dy, dx), axis=(0, 1))
        diff = np.abs(shifted_out - rolled_base)
        if margin:
            my = margin + abs(dy)
            mx = margin + abs(dx)
            diff = diff[my:-my, mx:-mx]
        rows.append(((dy, dx), float(diff.max())))
    return rows


def output_spread(net: DenoiserNet, layout: RecurrenceLayout, noisy: np.ndarray):
    """How far apart the k output patches sit after denoising.

    Returns (max pairwise |diff|, max |diff| from the explicit average).
    """
    patches = extract_patches(denoise(net, noisy), layout)
    avg = np.mean(patches, axis=0)
    pairwise = 0.0
    for i in range(len(patches)):
        for j in range(i + 1, len(patches)):
            pairwise = max(pairwise, float(np.abs(patches[i] - patches[j]).max()))
    to_avg = max(float(np.abs(q - avg).max()) for q in patches)
    return pairwise, to_avg
