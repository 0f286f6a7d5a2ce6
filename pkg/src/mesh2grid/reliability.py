"""Per-pixel reliability of the initial estimate.

Three per-pixel quantities drive the adaptive refinement:

* ``e_triangle``: effective data, the sum of exp(-distance) over the three
  vertices of the Delaunay triangle enclosing the pixel. More nearby samples
  mean a more trustworthy estimate.
* ``flatness``: one minus the dynamic range of those three sample values.
  Homogeneous neighborhoods are easier to reconstruct.
* ``r``: their blend, r = (1-lambda)*e_triangle + lambda*flatness.

Distances are in grid units (pixel spacing 1). Pixels outside the convex
hull fall back to the three nearest samples in place of a triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .grids import Image, MeshSamples, _atomic_write_bytes
from .triangulation import OUTSIDE_HULL, Triangulation, locate, locate_grid

#: Upper bound of e_triangle: three coincident samples at distance zero.
E_TRIANGLE_MAX = 3.0


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (0.0 <= lam <= 1.0) or math.isnan(lam):
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    return lam


@dataclass(frozen=True)
class ReliabilityMap:
    """Per-pixel reliability fields at a fixed balance ``lam``.

    All three arrays share the grid shape (height, width). The blend
    identity r = (1-lam)*e_triangle + lam*flatness holds pixelwise.
    """

    e_triangle: np.ndarray
    flatness: np.ndarray
    r: np.ndarray
    lam: float

    def __post_init__(self):
        e = np.asarray(self.e_triangle, dtype=np.float64)
        f = np.asarray(self.flatness, dtype=np.float64)
        r = np.asarray(self.r, dtype=np.float64)
        lam = _check_lambda(self.lam)
        if e.ndim != 2 or e.shape != f.shape or e.shape != r.shape:
            raise ValueError("e_triangle, flatness, r must share one 2-D shape")
        if e.size and (e.min() < 0.0 or e.max() > E_TRIANGLE_MAX + 1e-9):
            raise ValueError("e_triangle out of [0, 3]")
        if f.size and (f.min() < 0.0 or f.max() > 1.0 + 1e-12):
            raise ValueError("flatness out of [0, 1]")
        if e.size and np.max(np.abs((1.0 - lam) * e + lam * f - r)) > 1e-12:
            raise ValueError("r does not equal (1-lambda)*e_triangle + lambda*flatness")
        for name, arr in (("e_triangle", e), ("flatness", f), ("r", r)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "lam", lam)

    @property
    def width(self) -> int:
        return self.r.shape[1]

    @property
    def height(self) -> int:
        return self.r.shape[0]

    @property
    def r_max(self) -> float:
        """Upper end of the attainable r range, 3(1-lam) + lam."""
        return 3.0 * (1.0 - self.lam) + self.lam


def _decay_sum(dists: np.ndarray) -> np.ndarray:
    return np.exp(-dists).sum(axis=-1)


def _triangle_fields(
    tri: Triangulation, mesh: MeshSamples, tids: np.ndarray, px: np.ndarray, py: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    verts = tri.triangles[tids]  # (n, 3)
    pos = tri.vertices[verts]  # (n, 3, 2)
    d = np.hypot(pos[:, :, 0] - px[:, None], pos[:, :, 1] - py[:, None])
    vals = mesh.values[verts]
    e = _decay_sum(d)
    f = 1.0 - (vals.max(axis=1) - vals.min(axis=1))
    return e, f


def _nearest_fields(
    mesh: MeshSamples, px: np.ndarray, py: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    k = min(3, len(mesh))
    tree = cKDTree(mesh.positions)
    d, idx = tree.query(np.column_stack([px, py]), k=k)
    d = d.reshape(px.size, k)
    vals = mesh.values[idx.reshape(px.size, k)]
    e = _decay_sum(d)
    f = 1.0 - (vals.max(axis=1) - vals.min(axis=1))
    return e, f


def _point_fields(
    tri: Triangulation | None, mesh: MeshSamples, pixel
) -> tuple[float, float]:
    px = np.array([float(pixel[0])])
    py = np.array([float(pixel[1])])
    t = locate(tri, (px[0], py[0])) if tri is not None else OUTSIDE_HULL
    if t == OUTSIDE_HULL:
        e, f = _nearest_fields(mesh, px, py)
    else:
        e, f = _triangle_fields(tri, mesh, np.array([t]), px, py)
    return float(e[0]), float(f[0])


def effective_data_triangle(tri: Triangulation | None, mesh: MeshSamples, pixel) -> float:
    """Sum of exp(-distance) over the three samples enclosing ``pixel``.

    Outside the hull (or with no triangulation) the three nearest samples
    stand in for the triangle vertices.
    """
    return _point_fields(tri, mesh, pixel)[0]


def flatness(tri: Triangulation | None, mesh: MeshSamples, pixel) -> float:
    """1 - (max - min) of the three enclosing sample values."""
    return _point_fields(tri, mesh, pixel)[1]


def effective_data_global(mesh: MeshSamples, pixel, cutoff: float | None = None) -> float:
    """Sum of exp(-distance) over all mesh samples (diagnostic).

    ``cutoff``, if given, restricts the sum to samples within that radius;
    each omitted sample contributes less than exp(-cutoff). Off by default.
    """
    px, py = float(pixel[0]), float(pixel[1])
    dx = mesh.x - px
    dy = mesh.y - py
    d = np.hypot(dx, dy)
    if cutoff is not None:
        d = d[d <= cutoff]
    return float(np.exp(-d).sum())


def reliability_map(
    tri: Triangulation | None, mesh: MeshSamples, dims: tuple[int, int], lam: float
) -> ReliabilityMap:
    """Compute the reliability fields for every pixel of a (width, height) grid."""
    lam = _check_lambda(lam)
    width, height = int(dims[0]), int(dims[1])
    if width <= 0 or height <= 0:
        raise ValueError(f"grid dimensions must be positive, got {dims}")
    if len(mesh) == 0:
        raise ValueError("cannot compute reliability of an empty mesh")
    gy, gx = np.mgrid[0:height, 0:width]
    px = gx.ravel().astype(np.float64)
    py = gy.ravel().astype(np.float64)
    e = np.empty(px.size, dtype=np.float64)
    f = np.empty(px.size, dtype=np.float64)
    ids = (
        locate_grid(tri, width, height).ravel()
        if tri is not None
        else np.full(px.size, OUTSIDE_HULL, dtype=np.int32)
    )
    inside = ids >= 0
    if np.any(inside):
        e[inside], f[inside] = _triangle_fields(tri, mesh, ids[inside], px[inside], py[inside])
    if not np.all(inside):
        out = ~inside
        e[out], f[out] = _nearest_fields(mesh, px[out], py[out])
    np.clip(e, 0.0, E_TRIANGLE_MAX, out=e)
    r = (1.0 - lam) * e + lam * f
    shape = (height, width)
    return ReliabilityMap(e.reshape(shape), f.reshape(shape), r.reshape(shape), lam)


# ---------------------------------------------------------------------------
# Inspection formats
# ---------------------------------------------------------------------------

_MAGIC = "RMAP"


def save_reliability(rmap: ReliabilityMap, path) -> None:
    """Write the r field as little-endian float32 after a one-line text header.

    Header: ``RMAP <width> <height> <lambda>\\n``; data is row-major.
    """
    header = f"{_MAGIC} {rmap.width} {rmap.height} {rmap.lam!r}\n".encode("ascii")
    payload = rmap.r.astype("<f4").tobytes()
    _atomic_write_bytes(path, header + payload)


def load_reliability(path) -> tuple[np.ndarray, float]:
    """Read a file written by save_reliability; returns (r array, lambda)."""
    with open(path, "rb") as fh:
        header = fh.readline()
        blob = fh.read()
    parts = header.decode("ascii", errors="replace").split()
    if len(parts) != 4 or parts[0] != _MAGIC:
        raise ValueError(f"{path}: not a reliability map file")
    width, height = int(parts[1]), int(parts[2])
    lam = _check_lambda(float(parts[3]))
    expect = width * height * 4
    if len(blob) != expect:
        raise ValueError(f"{path}: expected {expect} data bytes, found {len(blob)}")
    r = np.frombuffer(blob, dtype="<f4").astype(np.float64).reshape(height, width)
    return r, lam


def render_reliability(rmap: ReliabilityMap) -> Image:
    """Affinely rescale r onto [0, 1] for graymap debugging output.

    A constant map renders as black; brighter means more reliable.
    """
    r = rmap.r
    lo, hi = float(r.min()), float(r.max())
    if hi - lo <= 0.0:
        return Image(np.zeros_like(r), meta={"render": "reliability"})
    return Image((r - lo) / (hi - lo), meta={"render": "reliability"})
