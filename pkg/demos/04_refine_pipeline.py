"""
Reliability-controlled refinement
=================================

Refinement turns reliability into per-pixel denoising strength,

    sigma^2(r) = clamp(alpha * exp(beta * r), 0, 40),

then runs the reference DCT denoiser at a small set of quantized strength
levels and composites the result: unreliable pixels get denoised hard,
reliable ones are left nearly untouched. With stock parameters this recovers
a consistent PSNR gain over the initial estimate.
"""

from pathlib import Path

from mesh2grid import (
    Method,
    SimConfig,
    antialias,
    default_params,
    psnr,
    refine_pipeline,
    save_image,
    simulate_mesh,
    synthetic_scene,
)

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

scene = synthetic_scene(size=160, seed=7)
mesh, reference = simulate_mesh(antialias(scene, 4), SimConfig(ratio=0.3, seed=1, phi=4))

for method in (Method.LIN, Method.NNB):
    params = default_params(method)
    result = refine_pipeline(mesh, method, params)
    p0 = psnr(reference, result.init)
    p1 = psnr(reference, result.refined)
    print(
        f"{method.value} (alpha={params.alpha}, beta={params.beta}, lambda={params.lam}): "
        f"{p0:6.2f} dB -> {p1:6.2f} dB  ({p1 - p0:+.2f})"
    )
    save_image(result.refined, out / f"refined_{method.value}.pgm")

print(f"wrote refined images to {out}")
