"""Initial image estimates on the regular grid from scattered mesh samples.

Four estimators: barycentric linear blending over the Delaunay triangulation
(LIN), nearest sample (NNB), inverse-distance weighting over the 8 nearest
samples (IDW), and multilevel B-spline approximation (MBS).
"""

from __future__ import annotations

import enum

import numpy as np
from scipy.spatial import cKDTree

from .grids import Image, MeshSamples
from .triangulation import Triangulation, locate_grid


class Method(enum.Enum):
    """Initial-estimate reconstruction method."""

    LIN = "lin"
    NNB = "nnb"
    IDW = "idw"
    MBS = "mbs"

    @classmethod
    def parse(cls, name: str) -> "Method":
        try:
            return cls(name.lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method {name!r} (expected one of: {valid})") from None


#: IDW neighborhood size and distance exponent.
IDW_NEIGHBORS = 8
IDW_POWER = 2

#: MBS starting control-lattice resolution (cells per axis).
MBS_START_CELLS = 4


def _grid_points(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    gy, gx = np.mgrid[0:height, 0:width]
    return gx.ravel().astype(np.float64), gy.ravel().astype(np.float64)


def reconstruct_initial(
    mesh: MeshSamples, tri: Triangulation | None, method: Method
) -> Image:
    """Reconstruct the full grid image from mesh samples.

    ``tri`` must be built from ``mesh`` and is used by LIN only; pass None
    when triangulation was degenerate, in which case LIN falls back to NNB
    and flags it in the result's ``meta`` ("fallback": "nnb").
    """
    if len(mesh) == 0:
        raise ValueError("cannot reconstruct from an empty mesh")
    width, height = mesh.bounds
    meta = {"method": method.value}
    if method is Method.LIN:
        if tri is None:
            data = _nearest(mesh, width, height)
            meta["fallback"] = "nnb"
        else:
            data = _linear(mesh, tri, width, height)
    elif method is Method.NNB:
        data = _nearest(mesh, width, height)
    elif method is Method.IDW:
        data = _inverse_distance(mesh, width, height)
    elif method is Method.MBS:
        data = _multilevel_bspline(mesh, width, height)
    else:  # pragma: no cover
        raise ValueError(f"unhandled method {method}")
    return Image(np.clip(data, 0.0, 1.0).reshape(height, width), meta=meta)


def _nearest(mesh: MeshSamples, width: int, height: int) -> np.ndarray:
    tree = cKDTree(mesh.positions)
    gx, gy = _grid_points(width, height)
    _, idx = tree.query(np.column_stack([gx, gy]), k=1)
    return mesh.values[idx]


def _inverse_distance(mesh: MeshSamples, width: int, height: int) -> np.ndarray:
    k = min(IDW_NEIGHBORS, len(mesh))
    tree = cKDTree(mesh.positions)
    gx, gy = _grid_points(width, height)
    d, idx = tree.query(np.column_stack([gx, gy]), k=k)
    d = np.atleast_2d(d.reshape(gx.size, k))
    idx = idx.reshape(gx.size, k)
    with np.errstate(divide="ignore"):
        w = d ** (-float(IDW_POWER))
    vals = mesh.values[idx]
    v0 = vals[:, 0]
    # Difference form around the nearest sample: exact on constant fields.
    num = np.einsum("pk,pk->p", w, vals - v0[:, None])
    norm = w.sum(axis=1)
    with np.errstate(invalid="ignore"):
        out = v0 + num / norm
    snap = d[:, 0] < 1e-9  # grid point (nearly) coincides with a sample
    if np.any(snap):
        out[snap] = mesh.values[idx[snap, 0]]
    return out


def _linear(mesh: MeshSamples, tri: Triangulation, width: int, height: int) -> np.ndarray:
    ids = locate_grid(tri, width, height).ravel()
    gx, gy = _grid_points(width, height)
    out = np.empty(gx.size, dtype=np.float64)

    inside = ids >= 0
    if np.any(inside):
        t = ids[inside]
        verts = tri.triangles[t]  # (p, 3)
        a = tri.vertices[verts[:, 0]]
        b = tri.vertices[verts[:, 1]]
        c = tri.vertices[verts[:, 2]]
        x, y = gx[inside], gy[inside]
        denom = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
            c[:, 0] - a[:, 0]
        )
        w1 = ((b[:, 0] - x) * (c[:, 1] - y) - (b[:, 1] - y) * (c[:, 0] - x)) / denom
        w2 = ((c[:, 0] - x) * (a[:, 1] - y) - (c[:, 1] - y) * (a[:, 0] - x)) / denom
        w3 = 1.0 - w1 - w2
        vals = mesh.values[verts]
        # Difference form: exact on constant fields (no weight-sum rounding).
        va = vals[:, 0]
        out[inside] = va + w2 * (vals[:, 1] - va) + w3 * (vals[:, 2] - va)
    if not np.all(inside):
        outside = ~inside
        tree = cKDTree(mesh.positions)
        _, idx = tree.query(np.column_stack([gx[outside], gy[outside]]), k=1)
        out[outside] = mesh.values[idx]
    return out


# ---------------------------------------------------------------------------
# Multilevel B-spline approximation
#
# Coarse-to-fine hierarchy of uniform cubic B-spline control lattices over
# the half-open domain [0, width) x [0, height). Each level is fitted to the
# residual of the previous one with the local least-squares update, and the
# level surfaces are summed. Refinement doubles the lattice until the cell
# spacing is at most one pixel on both axes.
# ---------------------------------------------------------------------------


def _bspline_basis(t: np.ndarray) -> np.ndarray:
    """The four uniform cubic B-spline basis values at local coordinate t; (n, 4)."""
    t2 = t * t
    t3 = t2 * t
    return np.stack(
        [
            (1.0 - t) ** 3 / 6.0,
            (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
            (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
            t3 / 6.0,
        ],
        axis=-1,
    )


def _lattice_coords(q: np.ndarray, cells: int, extent: float):
    u = q * (cells / extent)
    iu = np.minimum(u.astype(np.int64), cells - 1)
    return iu, u - iu


def _ba_fit(xs, ys, resid, mx, my, width, height) -> np.ndarray:
    iu, s = _lattice_coords(xs, mx, float(width))
    iv, t = _lattice_coords(ys, my, float(height))
    bs = _bspline_basis(s)  # (n, 4)
    bt = _bspline_basis(t)
    w = bt[:, :, None] * bs[:, None, :]  # (n, 4, 4): rows over y, cols over x
    w2 = w * w
    sum_w2 = w2.sum(axis=(1, 2))
    contrib = w2 * (w * (resid / sum_w2)[:, None, None])
    rows = iv[:, None, None] + np.arange(4)[None, :, None]
    cols = iu[:, None, None] + np.arange(4)[None, None, :]
    rows, cols = np.broadcast_arrays(rows, cols)
    num = np.zeros((my + 3, mx + 3))
    den = np.zeros_like(num)
    np.add.at(num, (rows.ravel(), cols.ravel()), contrib.ravel())
    np.add.at(den, (rows.ravel(), cols.ravel()), w2.ravel())
    phi = np.zeros_like(num)
    occupied = den > 0.0
    phi[occupied] = num[occupied] / den[occupied]
    return phi


def _ba_eval(phi, qx, qy, mx, my, width, height) -> np.ndarray:
    iu, s = _lattice_coords(qx, mx, float(width))
    iv, t = _lattice_coords(qy, my, float(height))
    bs = _bspline_basis(s)
    bt = _bspline_basis(t)
    rows = iv[:, None, None] + np.arange(4)[None, :, None]
    cols = iu[:, None, None] + np.arange(4)[None, None, :]
    w = bt[:, :, None] * bs[:, None, :]
    return np.einsum("nlk,nlk->n", w, phi[rows, cols])


def _multilevel_bspline(mesh: MeshSamples, width: int, height: int) -> np.ndarray:
    # Level 0 is the constant surface at the sample mean; B-spline levels fit
    # the residual. Constant fields therefore reproduce exactly, and regions
    # without data support relax to the mean instead of to zero.
    xs, ys = mesh.x, mesh.y
    v = mesh.values
    # A constant field's least-squares constant is the value itself; taking it
    # directly keeps summation rounding out of the residuals.
    base = float(v[0]) if np.all(v == v[0]) else float(v.mean())
    resid = v - base
    gx, gy = _grid_points(width, height)
    out = np.full(gx.size, base, dtype=np.float64)
    mx = my = MBS_START_CELLS
    while True:
        phi = _ba_fit(xs, ys, resid, mx, my, width, height)
        resid = resid - _ba_eval(phi, xs, ys, mx, my, width, height)
        out += _ba_eval(phi, gx, gy, mx, my, width, height)
        if width / mx <= 1.0 and height / my <= 1.0:
            return out
        mx *= 2
        my *= 2
