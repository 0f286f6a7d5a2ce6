"""
Reliability fields
==================

Per pixel the pipeline estimates how trustworthy the initial estimate is.
Two ingredients:

  E  effective data: exp(-distance) summed over the enclosing triangle's
     vertices, capped at 3. High where samples crowd the pixel.
  F  visual flatness: 1 minus the dynamic range of the triangle's sample
     values. High on homogeneous regions, low across edges.

The reliability map blends them, r = (1-lambda)*E + lambda*F, and the blend
weight lambda is a trained parameter. Fields are rendered to PGMs for a look.
"""

from pathlib import Path

import numpy as np

from mesh2grid import (
    Image,
    SimConfig,
    antialias,
    build_delaunay,
    reliability_map,
    render_reliability,
    save_image,
    save_reliability,
    simulate_mesh,
    synthetic_scene,
)

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

scene = synthetic_scene(size=160, seed=7)
mesh, reference = simulate_mesh(antialias(scene, 4), SimConfig(ratio=0.4, seed=2, phi=4))
tri = build_delaunay(mesh)

rmap = reliability_map(tri, mesh, mesh.bounds, lam=0.6)

print(f"E_triangle: min {rmap.e_triangle.min():.3f}  max {rmap.e_triangle.max():.3f} (cap 3)")
print(f"flatness  : min {rmap.flatness.min():.3f}  max {rmap.flatness.max():.3f}")
print(f"r (0.6)   : min {rmap.r.min():.3f}  max {rmap.r.max():.3f}")

# Normalized renderings; flat interiors glow, edges and sparse areas go dark.
save_image(render_reliability(rmap), out / "reliability.pgm")
save_image(Image(np.clip(rmap.e_triangle / 3.0, 0, 1)), out / "effective_data.pgm")
save_image(Image(rmap.flatness), out / "flatness.pgm")

# The binary sidecar format round-trips the exact float field.
save_reliability(rmap, out / "reliability.rmap")
print(f"wrote renderings and {out / 'reliability.rmap'}")
