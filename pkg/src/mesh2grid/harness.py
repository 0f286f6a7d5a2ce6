"""Reproducible evaluation protocol: simulate a floating mesh from a clean
image, reconstruct, refine, and report PSNR gains.

A source image is low-pass filtered (windowed-sinc, cutoff pi/phi), then
pixels at positions (m, n) with both indices multiples of phi form the
reference grid image while every other pixel becomes a candidate mesh
sample at (x, y) = (n/phi, m/phi). A seeded permutation picks the requested
share of candidates, so identical inputs always yield identical meshes,
reconstructions, and report CSVs.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.ndimage import convolve1d

from .denoise import ModelParams, refine, strength_map
from .grids import Image, MeshSamples, _atomic_write_bytes, load_image, make_mesh, psnr
from .interpolate import Method, reconstruct_initial
from .reliability import ReliabilityMap, reliability_map
from .training import default_params
from .triangulation import DegenerateInputError, build_delaunay

REPORT_HEADER = "image,method,ratio,seed,psnr_init_db,psnr_rmg_db,gain_db"


@dataclass(frozen=True)
class SimConfig:
    """Mesh-simulation knobs: sample ratio, RNG seed, downscale factor phi."""

    ratio: float
    seed: int = 0
    phi: int = 5

    def __post_init__(self):
        ratio = float(self.ratio)
        if not (0.0 < ratio <= 1.0):
            raise ValueError(f"ratio must be in (0, 1], got {self.ratio}")
        phi = int(self.phi)
        if phi < 2:
            raise ValueError(f"phi must be >= 2, got {self.phi}")
        seed = int(self.seed)
        if seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        object.__setattr__(self, "ratio", ratio)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "seed", seed)


def antialias_taps(phi: int) -> np.ndarray:
    """Separable low-pass taps: Hamming-windowed sinc, cutoff pi/phi, 4*phi+1 taps.

    Normalized to unit sum so flat regions pass through unchanged.
    """
    phi = int(phi)
    if phi < 2:
        raise ValueError(f"phi must be >= 2, got {phi}")
    n = np.arange(4 * phi + 1, dtype=np.float64) - 2.0 * phi
    with np.errstate(invalid="ignore", divide="ignore"):
        h = np.sin(np.pi * n / phi) / (np.pi * n)
    h[2 * phi] = 1.0 / phi
    h *= np.hamming(4 * phi + 1)
    return h / h.sum()


def _filter_separable(data: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # symmetric boundary extension on both axes
    out = convolve1d(data, taps, axis=0, mode="reflect")
    return convolve1d(out, taps, axis=1, mode="reflect")


def antialias(img: Image, phi: int) -> Image:
    """Low-pass the image below the mesh simulation's resampling rate."""
    taps = antialias_taps(phi)
    out = np.clip(_filter_separable(img.data, taps), 0.0, 1.0)
    return Image(out, meta={"antialias_phi": int(phi)})


def simulate_mesh(filtered: Image, cfg: SimConfig) -> tuple[MeshSamples, Image]:
    """Split a filtered image into a reference grid image and a floating mesh.

    Rows and columns beyond the largest multiple of phi are trimmed.
    Reference pixels sit where both indices are multiples of phi; all other
    positions are sampling candidates (so no mesh point ever lands on a
    grid position). round(ratio x reference pixel count) candidates are
    drawn without replacement via a seeded permutation prefix.
    """
    phi = cfg.phi
    gh = filtered.height // phi
    gw = filtered.width // phi
    if gh == 0 or gw == 0:
        raise ValueError(
            f"image {filtered.width}x{filtered.height} is smaller than phi={phi}"
        )
    data = filtered.data[: gh * phi, : gw * phi]
    ref = Image(data[::phi, ::phi].copy(), meta={"phi": phi})

    rr, cc = np.mgrid[0 : gh * phi, 0 : gw * phi]
    keep = ~((rr % phi == 0) & (cc % phi == 0))
    rs = rr[keep]  # row-major candidate order
    cs = cc[keep]
    count = int(math.floor(cfg.ratio * ref.data.size + 0.5))
    if count > rs.size:
        raise ValueError(
            f"requested {count} samples but only {rs.size} candidate positions exist"
        )
    idx = np.random.default_rng(cfg.seed).permutation(rs.size)[:count]
    mesh = make_mesh(
        cs[idx] / phi, rs[idx] / phi, data[rs[idx], cs[idx]], bounds=(gw, gh)
    )
    return mesh, ref


class PipelineResult(NamedTuple):
    init: Image
    refined: Image
    rmap: ReliabilityMap
    sigma2: np.ndarray


def refine_pipeline(
    mesh: MeshSamples,
    method: Method,
    params: ModelParams,
    levels: int = 9,
    denoiser: str = "dct",
    init: Image | None = None,
) -> PipelineResult:
    """Run the full reconstruction: initial estimate, reliability, adaptive denoise.

    ``init`` may be supplied to reuse a precomputed initial estimate; it
    must match the mesh bounds.
    """
    width, height = mesh.bounds
    try:
        tri = build_delaunay(mesh)
    except DegenerateInputError:
        tri = None
    if init is None:
        init = reconstruct_initial(mesh, tri, method)
    elif (init.width, init.height) != (width, height):
        raise ValueError(
            f"initial estimate {init.width}x{init.height} does not match "
            f"mesh bounds {width}x{height}"
        )
    rmap = reliability_map(tri, mesh, (width, height), params.lam)
    smap = strength_map(rmap, params)
    refined = refine(init, smap, levels=levels, denoiser=denoiser)
    return PipelineResult(init, refined, rmap, smap.sigma2)


def make_training_pairs(
    images: list[tuple[str, Image]],
    ratios,
    seed: int = 0,
    phi: int = 5,
) -> list[tuple[Image, MeshSamples]]:
    """Build (clean reference, mesh) training pairs from full-size images.

    Each image is antialiased once; one pair per (image, ratio) in the
    given order, all drawn with the same seed.
    """
    pairs = []
    for _, img in images:
        filtered = antialias(img, phi)
        for ratio in ratios:
            mesh, ref = simulate_mesh(filtered, SimConfig(float(ratio), seed, phi))
            pairs.append((ref, mesh))
    return pairs


# ---------------------------------------------------------------------------
# PSNR evaluation over (image, method, ratio, seed) cells
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalRow:
    image: str
    method: str
    ratio: float
    seed: int
    psnr_init_db: float
    psnr_rmg_db: float

    @property
    def gain_db(self) -> float:
        return self.psnr_rmg_db - self.psnr_init_db


def _eval_group(args) -> list[EvalRow]:
    """All methods for one (image, ratio, seed) cell group; picklable worker."""
    (name, filtered_data, phi, ratio, seed, method_values, params_list,
     levels, denoiser) = args
    filtered = Image(filtered_data)
    mesh, ref = simulate_mesh(filtered, SimConfig(ratio, seed, phi))
    try:
        tri = build_delaunay(mesh)
    except DegenerateInputError:
        tri = None
    rows = []
    for value, params in zip(method_values, params_list):
        method = Method(value)
        init = reconstruct_initial(mesh, tri, method)
        rmap = reliability_map(tri, mesh, mesh.bounds, params.lam)
        refined = refine(init, strength_map(rmap, params), levels=levels,
                         denoiser=denoiser)
        rows.append(
            EvalRow(name, value, ratio, seed, psnr(init, ref), psnr(refined, ref))
        )
    return rows


def evaluate(
    images: list[tuple[str, Image]],
    methods: list[Method],
    ratios,
    seeds,
    params_store: dict[Method, ModelParams],
    phi: int = 5,
    levels: int = 9,
    denoiser: str = "dct",
    jobs: int = 1,
) -> list[EvalRow]:
    """PSNR of the initial and refined reconstructions per evaluation cell.

    One row per (image, method, ratio, seed), sorted by that key. Mesh
    simulation and triangulation are shared across methods within a cell
    group; groups are independent and run in ``jobs`` processes.
    """
    methods = list(methods)
    for m in methods:
        if m not in params_store:
            raise ValueError(f"no parameters provided for method '{m.value}'")
    method_values = [m.value for m in methods]
    params_list = [params_store[m] for m in methods]
    tasks = []
    for name, img in images:
        filtered = antialias(img, phi)
        for ratio in ratios:
            for seed in seeds:
                tasks.append(
                    (name, filtered.data, phi, float(ratio), int(seed),
                     method_values, params_list, levels, denoiser)
                )
    if int(jobs) > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=int(jobs)) as pool:
            groups = list(pool.map(_eval_group, tasks))
    else:
        groups = [_eval_group(t) for t in tasks]
    rows = [row for group in groups for row in group]
    rows.sort(key=lambda r: (r.image, r.method, r.ratio, r.seed))
    return rows


def format_report(rows: list[EvalRow]) -> str:
    """Render rows as the report CSV (4 decimals, gain = refined - initial)."""
    lines = [REPORT_HEADER]
    for r in rows:
        init_db = round(r.psnr_init_db, 4)
        rmg_db = round(r.psnr_rmg_db, 4)
        lines.append(
            f"{r.image},{r.method},{r.ratio!r},{r.seed},"
            f"{init_db:.4f},{rmg_db:.4f},{rmg_db - init_db:.4f}"
        )
    return "\n".join(lines) + "\n"


def write_report(rows: list[EvalRow], path) -> None:
    _atomic_write_bytes(path, format_report(rows).encode("ascii"))


def load_corpus_dir(path) -> list[tuple[str, Image]]:
    """Load every .pgm in a directory, sorted by filename; names are stems."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {path}")
    files = sorted(root.glob("*.pgm"))
    if not files:
        raise FileNotFoundError(f"no .pgm images in {path}")
    return [(p.stem, load_image(p)) for p in files]


def default_params_store(methods) -> dict[Method, ModelParams]:
    """Stock parameters for each requested method."""
    return {m: default_params(m) for m in methods}
