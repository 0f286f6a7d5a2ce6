"""Delaunay triangulation of scattered points with walking point location.

Incremental Bowyer-Watson construction. Insertion follows the input point
order (no shuffling), so results are deterministic for a fixed input and
cocircular ties resolve by insertion order. Predicates use an absolute
epsilon of 1e-12 on determinants of coordinates shifted to the query
neighborhood; exact arithmetic is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import MeshSamples

#: Sentinel returned by locate() for points beyond the convex hull.
OUTSIDE_HULL = -1

_EPS = 1e-12


class DegenerateInputError(ValueError):
    """Fewer than 3 points, or all points collinear."""


@dataclass(frozen=True)
class Triangulation:
    """Immutable triangulation: vertex coordinates, CCW triangles, adjacency.

    ``neighbors[t, k]`` is the triangle across edge
    (``triangles[t, k]``, ``triangles[t, (k+1) % 3]``), or -1 on the hull.
    """

    vertices: np.ndarray  # (n, 2) float64
    triangles: np.ndarray  # (t, 3) int32, counter-clockwise
    neighbors: np.ndarray  # (t, 3) int32, -1 for hull edges
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("vertices", "triangles", "neighbors"):
            arr = getattr(self, name)
            arr.flags.writeable = False

    def _lists(self):
        """Plain-list views of the arrays; Python-loop walks are much faster on lists."""
        if "lists" not in self._cache:
            self._cache["lists"] = (
                self.vertices[:, 0].tolist(),
                self.vertices[:, 1].tolist(),
                self.triangles.tolist(),
                self.neighbors.tolist(),
            )
        return self._cache["lists"]


def build_delaunay(mesh) -> Triangulation:
    """Delaunay-triangulate mesh sample positions (or an (n, 2) point array).

    Points must be pairwise distinct. Raises DegenerateInputError for fewer
    than 3 points or an all-collinear set; callers fall back per their own
    contract.
    """
    if isinstance(mesh, MeshSamples):
        pts = mesh.positions
    else:
        pts = np.asarray(mesh, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"expected (n, 2) points, got shape {pts.shape}")
    n = pts.shape[0]
    if n < 3:
        raise DegenerateInputError(f"need at least 3 points, got {n}")

    px = pts[:, 0].tolist()
    py = pts[:, 1].tolist()

    # Reject fully collinear inputs: find any non-collinear triple.
    ax, ay = px[0], py[0]
    k1 = next((i for i in range(1, n) if px[i] != ax or py[i] != ay), None)
    if k1 is None:
        raise DegenerateInputError("all points coincide")
    bx, by = px[k1], py[k1]
    span = max(abs(bx - ax), abs(by - ay), 1.0)
    collinear = all(
        abs((bx - ax) * (py[i] - ay) - (by - ay) * (px[i] - ax)) <= _EPS * span
        for i in range(n)
    )
    if collinear:
        raise DegenerateInputError("all points are collinear")

    return _bowyer_watson(px, py)


def _bowyer_watson(px, py) -> Triangulation:
    n = len(px)
    xmin, xmax = min(px), max(px)
    ymin, ymax = min(py), max(py)
    cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)
    big = 1e6 * max(xmax - xmin, ymax - ymin, 1.0)

    # Super-triangle vertices occupy slots 0..2; real points are offset by 3.
    vx = [cx - 3.0 * big, cx + 3.0 * big, cx] + px
    vy = [cy - big, cy - big, cy + 3.0 * big] + py

    tri = [[0, 1, 2]]  # CCW vertex triples
    nbr = [[-1, -1, -1]]
    alive = [True]
    free: list[int] = []
    last = 0

    bad_flag = bytearray(1)

    def walk(t, x, y):
        # Visibility walk: cross to the first edge the point is strictly
        # beyond. The point always lies inside the super-triangle, so the
        # walk terminates; a step cap guards degenerate cycling.
        steps = 0
        cap = 4 * len(tri) + 64
        while True:
            va, vb, vc = tri[t]
            axx, ayy = vx[va], vy[va]
            bxx, byy = vx[vb], vy[vb]
            cxx, cyy = vx[vc], vy[vc]
            if (bxx - axx) * (y - ayy) - (byy - ayy) * (x - axx) < -_EPS:
                t2 = nbr[t][0]
            elif (cxx - bxx) * (y - byy) - (cyy - byy) * (x - bxx) < -_EPS:
                t2 = nbr[t][1]
            elif (axx - cxx) * (y - cyy) - (ayy - cyy) * (x - cxx) < -_EPS:
                t2 = nbr[t][2]
            else:
                return t
            t = t2
            steps += 1
            if steps > cap:  # pragma: no cover - degenerate cycling guard
                for i in range(len(tri)):
                    if alive[i] and _contains(i, x, y):
                        return i
                raise RuntimeError("point location walk failed")

    def _contains(t, x, y):
        va, vb, vc = tri[t]
        return (
            (vx[vb] - vx[va]) * (y - vy[va]) - (vy[vb] - vy[va]) * (x - vx[va])
            >= -_EPS
            and (vx[vc] - vx[vb]) * (y - vy[vb]) - (vy[vc] - vy[vb]) * (x - vx[vb])
            >= -_EPS
            and (vx[va] - vx[vc]) * (y - vy[vc]) - (vy[va] - vy[vc]) * (x - vx[vc])
            >= -_EPS
        )

    def in_circum(t, x, y):
        # Strictly inside the circumcircle of CCW triangle t, coordinates
        # pre-shifted to the query point.
        va, vb, vc = tri[t]
        adx = vx[va] - x
        ady = vy[va] - y
        bdx = vx[vb] - x
        bdy = vy[vb] - y
        cdx = vx[vc] - x
        cdy = vy[vc] - y
        ad = adx * adx + ady * ady
        bd = bdx * bdx + bdy * bdy
        cd = cdx * cdx + cdy * cdy
        det = (
            adx * (bdy * cd - bd * cdy)
            - ady * (bdx * cd - bd * cdx)
            + ad * (bdx * cdy - bdy * cdx)
        )
        return det > _EPS

    for ip in range(n):
        p = ip + 3
        x, y = vx[p], vy[p]
        t0 = walk(last, x, y)

        # Grow the cavity: connected set of triangles whose circumcircle
        # strictly contains the new point. The containing triangle is always
        # included so the cavity is never empty.
        if len(bad_flag) < len(tri):
            bad_flag.extend(b"\0" * (len(tri) - len(bad_flag)))
        cavity = [t0]
        bad_flag[t0] = 1
        stack = [t0]
        while stack:
            t = stack.pop()
            for t2 in nbr[t]:
                if t2 != -1 and not bad_flag[t2] and in_circum(t2, x, y):
                    bad_flag[t2] = 1
                    cavity.append(t2)
                    stack.append(t2)

        # Boundary edges of the cavity, directed as in their bad triangle.
        boundary = []  # (va, vb, external neighbor)
        for t in cavity:
            vs = tri[t]
            ns = nbr[t]
            for k in range(3):
                t2 = ns[k]
                if t2 == -1 or not bad_flag[t2]:
                    boundary.append((vs[k], vs[(k + 1) % 3], t2))

        for t in cavity:
            alive[t] = False
            bad_flag[t] = 0
            free.append(t)

        # Fan the cavity from the new point; new triangle (va, vb, p) keeps
        # CCW order because p lies left of every directed boundary edge.
        start_at = {}
        end_at = {}
        new_ids = []
        for va, vb, ext in boundary:
            if free:
                tid = free.pop()
                tri[tid] = [va, vb, p]
                nbr[tid] = [ext, -1, -1]
                alive[tid] = True
            else:
                tid = len(tri)
                tri.append([va, vb, p])
                nbr.append([ext, -1, -1])
                alive.append(True)
            start_at[va] = tid
            end_at[vb] = tid
            new_ids.append(tid)
            if ext != -1:
                evs = tri[ext]
                ens = nbr[ext]
                for k in range(3):
                    if evs[k] == vb and evs[(k + 1) % 3] == va:
                        ens[k] = tid
                        break
        for tid in new_ids:
            va, vb, _ = tri[tid]
            nbr[tid][1] = start_at[vb]
            nbr[tid][2] = end_at[va]
        last = new_ids[-1]

    # Drop super-triangle incidences, remap vertex ids, rebuild adjacency.
    keep = [
        t
        for t in range(len(tri))
        if alive[t] and tri[t][0] >= 3 and tri[t][1] >= 3 and tri[t][2] >= 3
    ]
    if not keep:
        raise DegenerateInputError("all points are collinear")
    triangles = np.array([[v - 3 for v in tri[t]] for t in keep], dtype=np.int32)
    vertices = np.column_stack([px, py]).astype(np.float64)

    # Guarantee CCW output even for near-degenerate slivers.
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
        c[:, 0] - a[:, 0]
    )
    flip = cross < 0
    if np.any(flip):
        triangles[flip, 1], triangles[flip, 2] = (
            triangles[flip, 2].copy(),
            triangles[flip, 1].copy(),
        )

    edge_owner = {}
    for t in range(triangles.shape[0]):
        v0, v1, v2 = (int(v) for v in triangles[t])
        edge_owner[(v0, v1)] = t
        edge_owner[(v1, v2)] = t
        edge_owner[(v2, v0)] = t
    neighbors = np.full_like(triangles, -1)
    for t in range(triangles.shape[0]):
        v0, v1, v2 = (int(v) for v in triangles[t])
        neighbors[t, 0] = edge_owner.get((v1, v0), -1)
        neighbors[t, 1] = edge_owner.get((v2, v1), -1)
        neighbors[t, 2] = edge_owner.get((v0, v2), -1)

    return Triangulation(vertices=vertices, triangles=triangles, neighbors=neighbors)


def locate(tri: Triangulation, p, start: int = 0) -> int:
    """Triangle containing point p, or OUTSIDE_HULL.

    Boundary points belong to the first triangle encountered in walk order;
    the walk starts at ``start``, so repeated calls are deterministic.
    """
    x, y = float(p[0]), float(p[1])
    t, _ = _walk_final(tri, start, x, y)
    return t


def _walk_final(tri: Triangulation, t, x, y):
    """Walk toward (x, y); returns (triangle or OUTSIDE_HULL, last alive triangle)."""
    px, py, tris, nbrs = tri._lists()
    steps = 0
    cap = 4 * len(tris) + 64
    while True:
        va, vb, vc = tris[t]
        exit_edge = -1
        if (px[vb] - px[va]) * (y - py[va]) - (py[vb] - py[va]) * (x - px[va]) < -_EPS:
            exit_edge = 0
        elif (px[vc] - px[vb]) * (y - py[vb]) - (py[vc] - py[vb]) * (x - px[vb]) < -_EPS:
            exit_edge = 1
        elif (px[va] - px[vc]) * (y - py[vc]) - (py[va] - py[vc]) * (x - px[vc]) < -_EPS:
            exit_edge = 2
        if exit_edge == -1:
            return t, t
        t2 = nbrs[t][exit_edge]
        if t2 == -1:
            return OUTSIDE_HULL, t
        t = t2
        steps += 1
        if steps > cap:  # pragma: no cover - degenerate cycling guard
            return _locate_scan(tri, x, y), t


def _locate_scan(tri: Triangulation, x, y):  # pragma: no cover - fallback path
    px, py, tris, _ = tri._lists()
    for t, (va, vb, vc) in enumerate(tris):
        if (
            (px[vb] - px[va]) * (y - py[va]) - (py[vb] - py[va]) * (x - px[va]) >= -_EPS
            and (px[vc] - px[vb]) * (y - py[vb]) - (py[vc] - py[vb]) * (x - px[vb])
            >= -_EPS
            and (px[va] - px[vc]) * (y - py[vc]) - (py[va] - py[vc]) * (x - px[vc])
            >= -_EPS
        ):
            return t
    return OUTSIDE_HULL


def locate_grid(tri: Triangulation, width: int, height: int) -> np.ndarray:
    """Containing triangle for every integer grid pixel, -1 outside the hull.

    Row-major scan reusing the previous pixel's triangle as the walk start,
    which keeps walks short on coherent grids.
    """
    ids = np.empty((height, width), dtype=np.int32)
    cur = 0
    for j in range(height):
        for i in range(width):
            t, last_alive = _walk_final(tri, cur, float(i), float(j))
            ids[j, i] = t
            cur = last_alive
    return ids


def barycentric(tri: Triangulation, t: int, p) -> tuple[float, float, float]:
    """Barycentric weights of p in triangle t; weights sum to 1 exactly."""
    va, vb, vc = tri.triangles[t]
    ax, ay = tri.vertices[va]
    bx, by = tri.vertices[vb]
    cx, cy = tri.vertices[vc]
    x, y = float(p[0]), float(p[1])
    denom = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if denom == 0.0:
        raise ValueError(f"triangle {t} has zero area")
    w1 = ((bx - x) * (cy - y) - (by - y) * (cx - x)) / denom
    w2 = ((cx - x) * (ay - y) - (cy - y) * (ax - x)) / denom
    w3 = 1.0 - w1 - w2
    return (w1, w2, w3)
