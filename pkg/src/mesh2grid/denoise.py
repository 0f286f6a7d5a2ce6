"""Reliability-controlled denoising of the initial estimate.

The per-pixel noise power sigma^2 = clamp(alpha * exp(beta * r), 0, sigma2_max)
turns reliability into denoising strength: unreliable pixels get denoised
hard, reliable ones are left nearly untouched. Noise powers use 8-bit
intensity-squared units (sigma2_max = 40 means sigma of about 6.3 codes)
and are converted to normalized units internally.

The reference denoiser slides an 8x8 window over the image with stride 1,
hard-thresholds the block DCT at 2.7*sigma (DC coefficient always kept),
and averages the overlapping block estimates with uniform weights. Any
denoiser keyed by name in the registry can stand in for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dctn, idctn

from .grids import Image
from .reliability import ReliabilityMap, _check_lambda

#: Default noise-power ceiling, 8-bit-squared units.
SIGMA2_MAX_DEFAULT = 40.0

#: Hard-threshold multiplier on sigma for the reference denoiser.
DCT_THRESHOLD_FACTOR = 2.7

_BLOCK = 8
_CHUNK_ROWS = 64  # block rows transformed per batch, bounds peak memory


@dataclass(frozen=True)
class ModelParams:
    """Strength-map parameters (alpha, beta) at a balance lam.

    ``lam`` is the reliability balance the parameters were trained for;
    the keyword is spelled out since ``lambda`` is reserved in Python.
    """

    alpha: float
    beta: float
    lam: float
    sigma2_max: float = SIGMA2_MAX_DEFAULT

    def __post_init__(self):
        alpha = float(self.alpha)
        beta = float(self.beta)
        sigma2_max = float(self.sigma2_max)
        if math.isnan(alpha) or alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if math.isnan(beta):
            raise ValueError("beta must be a real number")
        if not sigma2_max > 0.0:
            raise ValueError(f"sigma2_max must be > 0, got {self.sigma2_max}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "lam", _check_lambda(self.lam))
        object.__setattr__(self, "sigma2_max", sigma2_max)


@dataclass(frozen=True)
class StrengthMap:
    """Per-pixel noise power sigma^2 in [0, sigma2_max], 8-bit-squared units."""

    sigma2: np.ndarray
    sigma2_max: float = SIGMA2_MAX_DEFAULT

    def __post_init__(self):
        s = np.asarray(self.sigma2, dtype=np.float64)
        cap = float(self.sigma2_max)
        if s.ndim != 2:
            raise ValueError("sigma2 must be a 2-D per-pixel array")
        if not cap > 0.0:
            raise ValueError(f"sigma2_max must be > 0, got {self.sigma2_max}")
        if s.size and (s.min() < 0.0 or s.max() > cap + 1e-12):
            raise ValueError("sigma2 entries out of [0, sigma2_max]")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "sigma2", s)
        object.__setattr__(self, "sigma2_max", cap)


def strength_map(rmap: ReliabilityMap, params: ModelParams) -> StrengthMap:
    """Map reliability to per-pixel noise power, clamped to [0, sigma2_max]."""
    if rmap.lam != params.lam:
        raise ValueError(
            f"reliability balance {rmap.lam} does not match parameter balance "
            f"{params.lam}; parameters are trained per balance value"
        )
    raw = params.alpha * np.exp(params.beta * rmap.r)
    return StrengthMap(np.clip(raw, 0.0, params.sigma2_max), params.sigma2_max)


# ---------------------------------------------------------------------------
# Reference denoiser
# ---------------------------------------------------------------------------


def _coverage_counts(n: int, block: int) -> np.ndarray:
    """How many stride-1 blocks of length `block` cover each of n positions."""
    i = np.arange(n)
    lo = np.maximum(i - (block - 1), 0)
    hi = np.minimum(i, n - block)
    return (hi - lo + 1).astype(np.float64)


def _dct_denoise(data: np.ndarray, sigma2: float) -> np.ndarray:
    h, w = data.shape
    by = min(_BLOCK, h)
    bx = min(_BLOCK, w)
    tau = DCT_THRESHOLD_FACTOR * math.sqrt(sigma2) / 255.0
    nrows = h - by + 1
    windows = np.lib.stride_tricks.sliding_window_view(data, (by, bx))
    acc = np.zeros((h, w), dtype=np.float64)
    for r0 in range(0, nrows, _CHUNK_ROWS):
        r1 = min(r0 + _CHUNK_ROWS, nrows)
        coef = dctn(windows[r0:r1], axes=(-2, -1), norm="ortho")
        keep = np.abs(coef) > tau
        keep[..., 0, 0] = True  # DC carries the block mean, never thresholded
        rec = idctn(np.where(keep, coef, 0.0), axes=(-2, -1), norm="ortho")
        for dy in range(by):
            for dx in range(bx):
                acc[r0 + dy : r1 + dy, dx : dx + w - bx + 1] += rec[:, :, dy, dx]
    counts = np.outer(_coverage_counts(h, by), _coverage_counts(w, bx))
    return acc / counts


_DENOISERS = {"dct": _dct_denoise}


def available_denoisers() -> tuple[str, ...]:
    return tuple(sorted(_DENOISERS))


def register_denoiser(name: str, fn) -> None:
    """Add a plug-in denoiser; fn(data: (H,W) float array, sigma2: float) -> array."""
    _DENOISERS[str(name)] = fn


def denoise_at_sigma(img: Image, sigma2: float, denoiser: str = "dct") -> Image:
    """Denoise the whole image at one noise power (8-bit-squared units).

    sigma2 = 0 returns the input unchanged, bit for bit.
    """
    sigma2 = float(sigma2)
    if sigma2 < 0.0 or math.isnan(sigma2):
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    try:
        fn = _DENOISERS[denoiser]
    except KeyError:
        names = ", ".join(available_denoisers())
        raise ValueError(f"unknown denoiser {denoiser!r} (available: {names})") from None
    if sigma2 == 0.0:
        return img
    out = np.clip(fn(img.data, sigma2), 0.0, 1.0)
    return Image(out, meta={"denoiser": denoiser, "sigma2": sigma2})


def refine(
    init: Image, smap: StrengthMap, levels: int = 9, denoiser: str = "dct"
) -> Image:
    """Apply per-pixel denoising strength by level composition.

    sigma^2 values are quantized to ``levels`` uniform levels spanning
    [0, sigma2_max], the denoiser runs once per distinct nonzero level
    present, and each pixel takes the value from its nearest level's pass.
    Pixels at level 0 are copied from ``init`` unchanged.
    """
    levels = int(levels)
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    if smap.sigma2.shape != init.data.shape:
        raise ValueError(
            f"strength map shape {smap.sigma2.shape} does not match "
            f"image shape {init.data.shape}"
        )
    step = smap.sigma2_max / (levels - 1)
    q = np.floor(smap.sigma2 / step + 0.5).astype(np.intp)  # ties round up
    out = init.data.copy()
    for k in np.unique(q):
        if k == 0:
            continue
        pass_img = denoise_at_sigma(init, k * step, denoiser=denoiser)
        mask = q == k
        out[mask] = pass_img.data[mask]
    return Image(out, meta={"denoiser": denoiser, "levels": levels})
