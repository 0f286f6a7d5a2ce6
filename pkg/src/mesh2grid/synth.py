"""Deterministic synthetic grayscale scenes for tests and demos.

Scenes mix the ingredients reconstruction quality depends on: smooth
shading (easy), hard-edged shapes (hard, low flatness), and mid-frequency
texture (in between). Everything is drawn from a seeded generator, so a
(seed, size) pair always produces the same image.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .grids import Image


def synthetic_scene(size: int = 512, seed: int = 0) -> Image:
    """One seeded scene: shaded background, opaque ellipses, texture patch."""
    size = int(size)
    if size < 16:
        raise ValueError(f"size must be >= 16, got {size}")
    rng = np.random.default_rng([17, seed])
    yy, xx = np.mgrid[0:size, 0:size] / float(size)

    # smooth mid-tone background: oriented cosine waves plus blurred noise
    img = np.zeros((size, size))
    for _ in range(3):
        fx, fy = rng.uniform(-3.0, 3.0, 2)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        img += rng.uniform(0.08, 0.2) * np.cos(2.0 * np.pi * (fx * xx + fy * yy) + phase)
    img += gaussian_filter(rng.normal(0.0, 1.0, (size, size)), size / 10.0) * 6.0
    lo, hi = img.min(), img.max()
    img = 0.35 + 0.3 * (img - lo) / (hi - lo)

    # opaque ellipses: shades alternate between a dark and a bright band,
    # spread inside each band so edge contrast varies continuously
    def _shade(k):
        if k % 2 == 0:
            return rng.uniform(0.02, 0.35)
        return rng.uniform(0.65, 0.98)

    for k in range(20):
        cx, cy = rng.uniform(0.08, 0.92, 2)
        ax = rng.uniform(0.03, 0.16)
        ay = rng.uniform(0.03, 0.16)
        theta = rng.uniform(0.0, np.pi)
        shade = _shade(k)
        ct, st = np.cos(theta), np.sin(theta)
        u = (xx - cx) * ct + (yy - cy) * st
        v = -(xx - cx) * st + (yy - cy) * ct
        inside = (u / ax) ** 2 + (v / ay) ** 2 <= 1.0
        img[inside] = shade

    # thin bars add long straight edges
    for k in range(8):
        cx, cy = rng.uniform(0.15, 0.85, 2)
        theta = rng.uniform(0.0, np.pi)
        half_len = rng.uniform(0.15, 0.35)
        half_w = rng.uniform(0.006, 0.02)
        shade = _shade(k)
        ct, st = np.cos(theta), np.sin(theta)
        u = (xx - cx) * ct + (yy - cy) * st
        v = -(xx - cx) * st + (yy - cy) * ct
        img[(np.abs(u) <= half_len) & (np.abs(v) <= half_w)] = shade

    # one band-passed texture disk with moderate amplitude
    cx, cy = rng.uniform(0.2, 0.8, 2)
    rad = rng.uniform(0.12, 0.2)
    noise = rng.normal(0.0, 1.0, (size, size))
    band = gaussian_filter(noise, 1.5) - gaussian_filter(noise, 4.0)
    band *= 0.25 / max(band.std(), 1e-12)
    disk = (xx - cx) ** 2 + (yy - cy) ** 2 <= rad**2
    img[disk] = np.clip(img[disk] + band[disk], 0.0, 1.0)

    return Image(np.clip(img, 0.0, 1.0), meta={"seed": seed, "size": size})


def synthetic_corpus(count: int = 5, size: int = 512, seed: int = 0) -> list[tuple[str, Image]]:
    """Named scenes (scene00, scene01, ...) with per-scene derived seeds."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return [
        (f"scene{i:02d}", synthetic_scene(size, seed + i)) for i in range(int(count))
    ]
