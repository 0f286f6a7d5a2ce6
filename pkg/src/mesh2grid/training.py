"""Parameter estimation by maximizing expected accumulated gain.

Denoising a pixel of the initial estimate changes its squared error by the
gain G = (clean - init)^2 - (clean - denoised)^2. Averaging G over pixels
binned by reliability r and over a grid of noise powers sigma^2 yields a
gain surface; weighting the surface by the observed reliability histogram
under the strength-map rule sigma^2 = clamp(alpha*exp(beta*r), 0, max)
gives the expected accumulated gain of a parameter pair. Training scans an
exhaustive (alpha, beta, balance) grid and keeps the maximizer.

Training corpora are lists of (clean grid image, mesh samples) pairs; the
same pairs serve every balance value, so per-pair reconstructions and
denoising passes are computed once and re-binned per balance.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .denoise import SIGMA2_MAX_DEFAULT, ModelParams, denoise_at_sigma
from .grids import Image, MeshSamples, _atomic_write_bytes
from .interpolate import Method, reconstruct_initial
from .reliability import _check_lambda, reliability_map
from .triangulation import DegenerateInputError, build_delaunay

DEFAULT_R_BINS = 64
DEFAULT_SIGMA2_GRID = tuple(float(v) for v in range(0, 41, 2))
DEFAULT_ALPHA_GRID = tuple(np.geomspace(10.0, 1000.0, 40))
DEFAULT_BETA_GRID = tuple(np.arange(-8.0, 1e-9, 0.25))
DEFAULT_LAMBDA_GRID = tuple(np.round(np.linspace(0.0, 1.0, 11), 1))


def pixel_gain(clean, init, denoised):
    """Squared-error reduction achieved by denoising; scalars or arrays.

    Positive when the denoised value is closer to clean than the initial one.
    """
    clean = np.asarray(clean, dtype=np.float64)
    init = np.asarray(init, dtype=np.float64)
    denoised = np.asarray(denoised, dtype=np.float64)
    out = (clean - init) ** 2 - (clean - denoised) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GainSurface:
    """Mean pixel gain per (reliability bin, sigma^2 level) at one balance.

    ``mean_gain`` is NaN on bins no pixel fell into; ``count`` is the pixel
    count per reliability bin (the same pixels are scored at every sigma^2
    level, so one count covers the whole row).
    """

    lam: float
    r_edges: np.ndarray
    sigma2_grid: np.ndarray
    mean_gain: np.ndarray
    count: np.ndarray

    def __post_init__(self):
        lam = _check_lambda(self.lam)
        edges = np.asarray(self.r_edges, dtype=np.float64)
        grid = np.asarray(self.sigma2_grid, dtype=np.float64)
        mean = np.asarray(self.mean_gain, dtype=np.float64)
        count = np.asarray(self.count, dtype=np.int64)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("r_edges must be ascending with at least two entries")
        if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0):
            raise ValueError("sigma2_grid must be strictly ascending")
        if mean.shape != (edges.size - 1, grid.size):
            raise ValueError("mean_gain must have shape (bins, sigma2 levels)")
        if count.shape != (edges.size - 1,):
            raise ValueError("count must have one entry per bin")
        empty = count == 0
        if np.any(~np.isnan(mean[empty])) or np.any(np.isnan(mean[~empty])):
            raise ValueError("mean_gain must be NaN exactly on empty bins")
        for name, arr in (("r_edges", edges), ("sigma2_grid", grid),
                          ("mean_gain", mean), ("count", count)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "lam", lam)

    @property
    def occupied(self) -> np.ndarray:
        return self.count > 0


@dataclass(frozen=True)
class ReliabilityHistogram:
    """Probability mass of grid pixels per reliability bin."""

    edges: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.float64)
        p = np.asarray(self.p, dtype=np.float64)
        if p.shape != (edges.size - 1,):
            raise ValueError("p must have one entry per bin")
        if p.size and p.min() < 0.0:
            raise ValueError("probability mass must be nonnegative")
        if abs(float(p.sum()) - 1.0) > 1e-9:
            raise ValueError(f"probability mass sums to {p.sum()!r}, not 1")
        for name, arr in (("edges", edges), ("p", p)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class TrainingResult:
    method: Method
    params: ModelParams
    expected_gain: float
    diagnostics: dict = field(compare=False, repr=False)


class _ItemTables(NamedTuple):
    """Balance-independent per-pair arrays: reliability parts and gains."""

    e: np.ndarray  # effective data per pixel
    f: np.ndarray  # flatness per pixel
    gains: np.ndarray  # (len(sigma2_grid), H, W) pixel gains


def _corpus_tables(corpus, method: Method, sigma2_grid, denoiser: str) -> list[_ItemTables]:
    if not corpus:
        raise ValueError("training corpus is empty")
    grid = np.asarray(sigma2_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("sigma2_grid must be non-empty and strictly ascending")
    if grid[0] != 0.0:
        raise ValueError("sigma2_grid must include 0 (the no-denoising level)")
    tables = []
    for clean, mesh in corpus:
        if not isinstance(clean, Image):
            raise TypeError("corpus entries must be (Image, MeshSamples) pairs")
        try:
            tri = build_delaunay(mesh)
        except DegenerateInputError:
            tri = None
        init = reconstruct_initial(mesh, tri, method)
        dims = (clean.width, clean.height)
        if (init.width, init.height) != dims:
            raise ValueError(
                f"mesh bounds {mesh.bounds} do not match clean image dims {dims}"
            )
        rmap = reliability_map(tri, mesh, dims, 0.0)
        gains = np.empty((grid.size, clean.height, clean.width), dtype=np.float64)
        base = (clean.data - init.data) ** 2
        for k, s2 in enumerate(grid):
            den = denoise_at_sigma(init, float(s2), denoiser=denoiser)
            gains[k] = base - (clean.data - den.data) ** 2
        tables.append(_ItemTables(rmap.e_triangle, rmap.flatness, gains))
    return tables


def _bin_tables(
    tables: list[_ItemTables], lam: float, sigma2_grid, r_bins: int
) -> tuple[GainSurface, ReliabilityHistogram]:
    lam = _check_lambda(lam)
    grid = np.asarray(sigma2_grid, dtype=np.float64)
    bins = int(r_bins)
    if bins < 1:
        raise ValueError("r_bins must be >= 1")
    r_max = 3.0 * (1.0 - lam) + lam
    edges = np.linspace(0.0, r_max, bins + 1)
    sums = np.zeros((bins, grid.size), dtype=np.float64)
    counts = np.zeros(bins, dtype=np.int64)
    for item in tables:
        r = (1.0 - lam) * item.e + lam * item.f
        idx = np.minimum((r * (bins / r_max)).astype(np.int64), bins - 1).ravel()
        counts += np.bincount(idx, minlength=bins)
        for k in range(grid.size):
            sums[:, k] += np.bincount(idx, weights=item.gains[k].ravel(), minlength=bins)
    mean = np.full_like(sums, np.nan)
    occ = counts > 0
    mean[occ] = sums[occ] / counts[occ, None]
    surface = GainSurface(lam, edges, grid, mean, counts)
    hist = ReliabilityHistogram(edges, counts / counts.sum())
    return surface, hist


def build_gain_surface(
    corpus,
    method: Method,
    lam: float,
    sigma2_grid=DEFAULT_SIGMA2_GRID,
    r_bins: int = DEFAULT_R_BINS,
    denoiser: str = "dct",
) -> tuple[GainSurface, ReliabilityHistogram]:
    """Accumulate per-pixel gains of a corpus into a (r-bin, sigma^2) surface.

    For every (clean, mesh) pair the initial estimate is reconstructed once
    and denoised once per sigma^2 level; each pixel's gains land in its
    reliability bin. The histogram records the bins' occupancy mass.
    """
    tables = _corpus_tables(corpus, method, sigma2_grid, denoiser)
    return _bin_tables(tables, lam, sigma2_grid, r_bins)


def max_accumulated_gain(surface: GainSurface) -> tuple[float, np.ndarray]:
    """Best-case accumulated gain: per-bin max over sigma^2 (diagnostic).

    Returns (total, path) where path[b] is the gain-maximizing sigma^2 of
    occupied bin b (NaN on empty bins) and total sums max gain times bin
    width over occupied bins. Ties take the smallest sigma^2.
    """
    widths = np.diff(surface.r_edges)
    path = np.full(surface.count.size, np.nan)
    total = 0.0
    for b in np.flatnonzero(surface.occupied):
        row = surface.mean_gain[b]
        k = int(np.argmax(row))
        path[b] = surface.sigma2_grid[k]
        total += float(row[k]) * float(widths[b])
    return total, path


def expected_gain(
    surface: GainSurface, hist: ReliabilityHistogram, alpha: float, beta: float
) -> float:
    """Histogram-weighted mean gain under the strength rule at (alpha, beta).

    Each occupied bin contributes p(bin) times the surface gain at
    sigma^2 = clamp(alpha*exp(beta*center), 0, max level), linearly
    interpolated between the two neighboring sigma^2 levels.
    """
    if not np.array_equal(surface.r_edges, hist.edges):
        raise ValueError("gain surface and histogram use different binnings")
    occ = surface.occupied
    if not np.any(occ):
        return 0.0
    edges = surface.r_edges
    centers = (0.5 * (edges[:-1] + edges[1:]))[occ]
    grid = surface.sigma2_grid
    s2 = np.clip(float(alpha) * np.exp(float(beta) * centers), grid[0], grid[-1])
    j = np.clip(np.searchsorted(grid, s2, side="right") - 1, 0, grid.size - 2)
    t = (s2 - grid[j]) / (grid[j + 1] - grid[j])
    rows = surface.mean_gain[occ]
    sel = np.arange(rows.shape[0])
    g = rows[sel, j] * (1.0 - t) + rows[sel, j + 1] * t
    return float(np.sum(g * hist.p[occ]))


def fit_parameters(
    corpus,
    method: Method,
    alpha_grid=DEFAULT_ALPHA_GRID,
    beta_grid=DEFAULT_BETA_GRID,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    sigma2_grid=DEFAULT_SIGMA2_GRID,
    r_bins: int = DEFAULT_R_BINS,
    denoiser: str = "dct",
) -> TrainingResult:
    """Exhaustive search for the (alpha, beta, balance) maximizing expected gain.

    One gain surface is built per balance value and the (alpha, beta) grid
    is scanned on it. Exact ties prefer smaller alpha, then larger beta,
    then smaller balance. Diagnostics carry the full scan (g_e_scan indexed
    [balance, alpha, beta]), the grids, and the winning surface's
    max-accumulated-gain path.
    """
    alphas = [float(a) for a in alpha_grid]
    betas = [float(b) for b in beta_grid]
    lams = [float(l) for l in lambda_grid]
    if not alphas or not betas or not lams:
        raise ValueError("search grids must be non-empty")
    tables = _corpus_tables(corpus, method, sigma2_grid, denoiser)

    scan = np.empty((len(lams), len(alphas), len(betas)), dtype=np.float64)
    best = None  # (g, -alpha, beta, -lam) lexicographic key
    best_idx = None
    surfaces = {}
    for li, lam in enumerate(lams):
        surface, hist = _bin_tables(tables, lam, sigma2_grid, r_bins)
        surfaces[lam] = (surface, hist)
        for ai, alpha in enumerate(alphas):
            for bi, beta in enumerate(betas):
                g = expected_gain(surface, hist, alpha, beta)
                scan[li, ai, bi] = g
                key = (g, -alpha, beta, -lam)
                if best is None or key > best:
                    best = key
                    best_idx = (li, ai, bi)

    li, ai, bi = best_idx
    lam, alpha, beta = lams[li], alphas[ai], betas[bi]
    sigma2_max = float(np.asarray(sigma2_grid, dtype=np.float64)[-1])
    g_a, path = max_accumulated_gain(surfaces[lam][0])
    diagnostics = {
        "g_e_scan": scan,
        "alpha_grid": np.array(alphas),
        "beta_grid": np.array(betas),
        "lambda_grid": np.array(lams),
        "g_a": g_a,
        "max_gain_path": path,
        "r_bins": int(r_bins),
        "sigma2_grid": np.asarray(sigma2_grid, dtype=np.float64),
    }
    return TrainingResult(
        method=method,
        params=ModelParams(alpha, beta, lam, sigma2_max),
        expected_gain=best[0],
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Shipped defaults and the key=value parameter file format
# ---------------------------------------------------------------------------

#: Stock strength-map parameters per initial-estimation method, including
#: methods this package does not implement (kept for interoperability with
#: parameter files produced elsewhere): (alpha, beta, lam).
DEFAULT_PARAMS: dict[str, ModelParams] = {
    name: ModelParams(alpha, beta, lam)
    for name, (alpha, beta, lam) in {
        "LIN": (214.0, -4.3, 0.6),
        "CUB": (298.0, -4.5, 0.6),
        "NNI": (185.0, -4.4, 0.6),
        "NNB": (133.0, -2.5, 0.9),
        "IDW": (216.0, -3.5, 0.5),
        "MBS": (318.0, -4.7, 0.3),
        "KER": (394.0, -4.8, 0.2),
    }.items()
}


def default_params(method: Method | str) -> ModelParams:
    """Stock parameters for a method; raises on names with no shipped entry."""
    key = method.value.upper() if isinstance(method, Method) else str(method).upper()
    try:
        return DEFAULT_PARAMS[key]
    except KeyError:
        known = ", ".join(sorted(DEFAULT_PARAMS))
        raise ValueError(f"no stock parameters for {key!r} (known: {known})") from None


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def save_params(path, method: Method | str, params: ModelParams,
                expected: float | None = None) -> None:
    """Write a key=value parameter file (method, alpha, beta, lambda, ...)."""
    name = method.value.upper() if isinstance(method, Method) else str(method).upper()
    lines = [
        f"method={name}",
        f"alpha={params.alpha!r}",
        f"beta={params.beta!r}",
        f"lambda={params.lam!r}",
        f"sigma2_max={_fmt(params.sigma2_max)}",
    ]
    if expected is not None:
        lines.append(f"expected_gain={expected!r}")
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def save_training_result(path, result: TrainingResult) -> None:
    save_params(path, result.method, result.params, result.expected_gain)


_KEY_RE = re.compile(r"^([A-Za-z0-9_]+)=(.*)$")


def load_params(path) -> tuple[str, ModelParams, float | None]:
    """Parse a key=value parameter file; returns (method name, params, expected)."""
    fields: dict[str, str] = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            m = _KEY_RE.match(line)
            if m is None:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            fields[m.group(1)] = m.group(2)
    missing = [k for k in ("method", "alpha", "beta", "lambda") if k not in fields]
    if missing:
        raise ValueError(f"{path}: missing required keys: {', '.join(missing)}")
    try:
        params = ModelParams(
            float(fields["alpha"]),
            float(fields["beta"]),
            float(fields["lambda"]),
            float(fields.get("sigma2_max", SIGMA2_MAX_DEFAULT)),
        )
        expected = float(fields["expected_gain"]) if "expected_gain" in fields else None
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return fields["method"].upper(), params, expected
