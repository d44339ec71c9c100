"""PSNR / SSIM scoring and corpus aggregation.

PSNR of identical images is reported as the math.inf sentinel and excluded
from corpus means. SSIM uses an 11x11 Gaussian window (sigma 1.5), K1=0.01,
K2=0.03, dynamic range 1.0; color images score as the per-channel mean.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.signal import correlate2d

from .tensor import ShapeError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """10*log10(peak^2 / MSE) over all channels; inf for identical inputs."""
    if a.shape != b.shape:
        raise ShapeError(f"psnr shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((np.asarray(a, np.float64) - np.asarray(b, np.float64)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA):
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r**2) / (2 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_channel(a: np.ndarray, b: np.ndarray, peak: float) -> float:
    w = _gaussian_window()
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    mu_a = correlate2d(a, w, mode="valid")
    mu_b = correlate2d(b, w, mode="valid")
    s_aa = correlate2d(a * a, w, mode="valid") - mu_a**2
    s_bb = correlate2d(b * b, w, mode="valid") - mu_b**2
    s_ab = correlate2d(a * b, w, mode="valid") - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * s_ab + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (s_aa + s_bb + c2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """Mean local SSIM; windows fully inside the image (valid mode)."""
    if a.shape != b.shape:
        raise ShapeError(f"ssim shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a = a[:, :, None]
        b = b[:, :, None]
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ShapeError(
            f"image {a.shape[:2]} smaller than SSIM window {SSIM_WINDOW}"
        )
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    vals = [_ssim_channel(a[:, :, c], b[:, :, c], peak) for c in range(a.shape[2])]
    return float(np.mean(vals))


@dataclass
class ScoreRow:
    image_id: str
    psnr_db: float  # math.inf sentinel for identical images
    ssim: float
    tags: Dict[str, str] = field(default_factory=dict)


MEAN_ID = "__mean__"
CSV_HEADER = ["id", "psnr_db", "ssim", "sigma_255", "M", "mode"]


def evaluate_corpus(
    pairs: Sequence[Tuple[np.ndarray, np.ndarray]],
    ids: Sequence[str],
    tags: Dict[str, str] = None,
) -> List[ScoreRow]:
    """Score (restored, clean) pairs; appends a mean row.

    Rows are ordered by image id so the mean reduction order is fixed.
    Infinite-PSNR rows are excluded from the PSNR mean and flagged.
    """
    if not pairs:
        raise ValueError("empty corpus")
    if len(pairs) != len(ids):
        raise ValueError(f"{len(pairs)} pairs but {len(ids)} ids")
    tags = dict(tags or {})
    order = sorted(range(len(ids)), key=lambda i: ids[i])
    rows = []
    for i in order:
        restored, clean = pairs[i]
        row = ScoreRow(ids[i], psnr(restored, clean), ssim(restored, clean), dict(tags))
        if math.isinf(row.psnr_db):
            row.tags["warning"] = "infinite psnr excluded from mean"
        rows.append(row)
    finite = [r.psnr_db for r in rows if not math.isinf(r.psnr_db)]
    mean_psnr = math.inf if not finite else sum(finite) / len(finite)
    mean_ssim = sum(r.ssim for r in rows) / len(rows)
    rows.append(ScoreRow(MEAN_ID, mean_psnr, mean_ssim, dict(tags)))
    return rows


def write_score_csv(rows: List[ScoreRow], path):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.image_id,
                    "inf" if math.isinf(r.psnr_db) else f"{r.psnr_db:.6f}",
                    f"{r.ssim:.6f}",
                    r.tags.get("sigma_255", ""),
                    r.tags.get("M", ""),
                    r.tags.get("mode", ""),
                ]
            )
