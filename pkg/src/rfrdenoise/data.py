"""Procedural image corpus and PNG / layout-sidecar I/O.

Textures are multi-octave value noise with a motif tile re-stamped at known
spots, so every generated image carries exact internal patch repetitions.
Recurrence images come straight from selfsim layouts and ship with a text
sidecar recording the patch geometry.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Tuple

import numpy as np
from PIL import Image as PILImage

from .selfsim import RecurrenceLayout, grid_positions, make_recurrence_image


def load_image(path) -> np.ndarray:
    """PNG -> float32 H x W x C in [0,1] (C = 1 or 3)."""
    img = PILImage.open(path)
    if img.mode not in ("L", "RGB"):
        img = img.convert("RGB")
    arr = np.asarray(img, dtype=np.float32) / 255.0
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr


def save_image(image: np.ndarray, path):
    """Clamp to [0,1], quantize to 8 bits, write PNG."""
    arr = np.clip(image, 0.0, 1.0)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    q = np.round(arr * 255.0).astype(np.uint8)
    if q.shape[2] == 1:
        PILImage.fromarray(q[:, :, 0], mode="L").save(path)
    else:
        PILImage.fromarray(q, mode="RGB").save(path)


def _value_noise(size: int, grid: int, rng: np.random.Generator) -> np.ndarray:
    """Bilinearly interpolated random lattice, one octave."""
    lattice = rng.random((grid + 1, grid + 1))
    t = np.linspace(0, grid, size, endpoint=False)
    i = np.floor(t).astype(int)
    f = t - i
    a = lattice[np.ix_(i, i)]
    b = lattice[np.ix_(i, i + 1)]
    c = lattice[np.ix_(i + 1, i)]
    d = lattice[np.ix_(i + 1, i + 1)]
    fy = f[:, None]
    fx = f[None, :]
    return (
        a * (1 - fy) * (1 - fx)
        + b * (1 - fy) * fx
        + c * fy * (1 - fx)
        + d * fy * fx
    )


def make_texture(
    size: int,
    rng: np.random.Generator,
    channels: int = 1,
    motif: int = 32,
    repeats: int = 4,
) -> np.ndarray:
    """Natural-looking texture with >= `repeats` exact motif copies.

    Multi-octave value noise, then a motif tile cut from the texture itself
    is stamped on a grid, guaranteeing internal self-similarity.
    """
    octaves = [(4, 0.5), (8, 0.25), (16, 0.15), (32, 0.1)]
    chans = []
    for _ in range(channels):
        acc = np.zeros((size, size))
        for grid, weight in octaves:
            acc += weight * _value_noise(size, min(grid, size), rng)
        acc -= acc.min()
        acc /= max(acc.max(), 1e-12)
        chans.append(0.1 + 0.8 * acc)
    tex = np.stack(chans, axis=-1).astype(np.float32)
    side = int(round(np.sqrt(max(repeats, 0))))
    if repeats >= 2 and size - 2 * 4 >= side * motif:
        positions = grid_positions(side * side, motif, size, margin=4)
        tile = tex[positions[0][0] : positions[0][0] + motif,
                   positions[0][1] : positions[0][1] + motif].copy()
        for y, x in positions:
            tex[y : y + motif, x : x + motif] = tile
    return tex


def make_recurrence_layout(
    k: int,
    rng: np.random.Generator,
    patch_size: int = 32,
    canvas_size: int = 160,
    channels: int = 1,
    margin: int = 0,
) -> RecurrenceLayout:
    """Textured canvas plus a textured patch at k grid positions.

    A nonzero margin keeps copies away from the canvas border and from each
    other; patch-averaging studies want that, since flush-packed copies
    change each copy's context and with it the denoiser's local bias.
    """
    canvas = make_texture(canvas_size, rng, channels=channels, repeats=0)
    patch_src = make_texture(
        max(patch_size, 32), rng, channels=channels, repeats=0
    )
    patch = patch_src[:patch_size, :patch_size].copy()
    return RecurrenceLayout(
        patch=patch,
        positions=grid_positions(k, patch_size, canvas_size, margin=margin),
        canvas=canvas,
    )


def save_layout_sidecar(layout: RecurrenceLayout, path):
    """Header `patch_size k`, then one `x y` (col row) line per copy."""
    lines = [f"{layout.patch_size} {layout.k}"]
    lines += [f"{x} {y}" for y, x in layout.positions]
    Path(path).write_text("\n".join(lines) + "\n")


def load_layout_sidecar(path, image: np.ndarray) -> RecurrenceLayout:
    """Rebuild a layout from its sidecar and the clean recurrence image.

    The patch content is read back out of the image at the first position.
    """
    lines = Path(path).read_text().split()
    patch_size, k = int(lines[0]), int(lines[1])
    coords = [int(v) for v in lines[2:]]
    if len(coords) != 2 * k:
        raise ValueError(f"sidecar {path} lists {len(coords)//2} positions, not {k}")
    positions = [(coords[2 * i + 1], coords[2 * i]) for i in range(k)]
    y0, x0 = positions[0]
    patch = image[y0 : y0 + patch_size, x0 : x0 + patch_size].copy()
    return RecurrenceLayout(patch=patch, positions=positions, canvas=image.copy())


def gen_corpus(
    count: int,
    size: int,
    kind: str,
    seed: int,
    out_dir,
    channels: int = 1,
    recurrence_k: int = 25,
) -> List[Path]:
    """Write `count` clean PNGs (plus sidecars for recurrence images)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind not in ("texture", "recurrence"):
        raise ValueError(f"kind must be 'texture' or 'recurrence', got {kind!r}")
    paths = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        name = f"{kind}_{i:04d}.png"
        if kind == "texture":
            img = make_texture(size, rng, channels=channels)
        else:
            layout = make_recurrence_layout(
                recurrence_k, rng, canvas_size=size, channels=channels
            )
            img = make_recurrence_image(layout)
            save_layout_sidecar(layout, out / (name[:-4] + ".layout"))
        save_image(img, out / name)
        paths.append(out / name)
    return paths
