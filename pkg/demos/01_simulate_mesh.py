"""
Simulating a floating mesh from a regular image
===============================================

A "floating mesh" is a set of image samples at non-integer positions. To
benchmark reconstruction we manufacture one from a normal image: low-pass
filter, keep every phi-th pixel as the hidden reference, and draw a random
subset of the remaining pixels as mesh samples whose coordinates land between
the reference grid points.
"""

from pathlib import Path

from mesh2grid import SimConfig, antialias, save_image, save_mesh, simulate_mesh, synthetic_scene

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

# A deterministic 160x160 synthetic test scene (flat regions, edges, texture).
scene = synthetic_scene(size=160, seed=7)
save_image(scene, out / "scene.pgm")

# Low-pass ahead of decimation, cutoff pi/phi. phi=4 gives a 40x40 reference.
phi = 4
filtered = antialias(scene, phi)

# Half the reference pixel count, drawn as a seeded permutation prefix.
cfg = SimConfig(ratio=0.5, seed=1, phi=phi)
mesh, reference = simulate_mesh(filtered, cfg)

print(f"reference grid : {reference.width}x{reference.height}")
print(f"mesh samples   : {len(mesh)} ({len(mesh) / (reference.width * reference.height):.0%} of grid)")
print(f"x range        : [{mesh.x.min():.2f}, {mesh.x.max():.2f}]  (non-integer positions)")

save_mesh(mesh, out / "mesh.csv")
save_image(reference, out / "reference.pgm")
print(f"wrote {out / 'mesh.csv'} and {out / 'reference.pgm'}")
