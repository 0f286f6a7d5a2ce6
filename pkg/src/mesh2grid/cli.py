"""Command-line interface: each reconstruction stage as a subcommand.

Subcommands: mesh-sim (image -> mesh CSV + reference), reconstruct (mesh ->
initial estimate), refine (mesh -> adaptively denoised image), train
(corpus -> parameter file), evaluate (corpus -> PSNR report CSV), psnr.
Data goes to files, diagnostics to stderr; outputs are written atomically.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .denoise import ModelParams, available_denoisers, refine
from .grids import Image, load_image, load_mesh, psnr, save_image, save_mesh
from .harness import (
    SimConfig,
    antialias,
    default_params_store,
    evaluate,
    load_corpus_dir,
    make_training_pairs,
    refine_pipeline,
    simulate_mesh,
    write_report,
)
from .interpolate import Method, reconstruct_initial
from .reliability import reliability_map, save_reliability
from .training import (
    default_params,
    fit_parameters,
    load_params,
    save_training_result,
)
from .triangulation import DegenerateInputError, build_delaunay


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _parse_method(text: str) -> Method:
    try:
        return Method.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _parse_methods(text: str) -> list[Method]:
    try:
        return [Method.parse(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--phi", type=int, default=5, help="downscale factor (default 5)")
    p.add_argument("--seed", type=int, default=0, help="sampling RNG seed (default 0)")


def _add_denoise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=int, default=9,
                   help="strength quantization levels (default 9)")
    p.add_argument("--denoiser", default="dct",
                   help=f"denoiser name (default dct; available: "
                        f"{', '.join(available_denoisers())})")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mesh2grid",
        description="Reconstruct regular-grid images from scattered mesh samples "
                    "and refine them with reliability-controlled denoising.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh-sim", help="simulate a floating mesh from an image")
    p.add_argument("--image", required=True, help="source graymap (.pgm)")
    p.add_argument("--ratio", type=float, required=True,
                   help="sample count as a share of grid pixels, in (0, 1]")
    _add_sim_flags(p)
    p.add_argument("--out-mesh", required=True, help="output mesh CSV")
    p.add_argument("--out-ref", help="optional reference grid image output")
    p.add_argument("--out-filtered", help="optional antialiased image output")

    p = sub.add_parser("reconstruct", help="initial estimate from a mesh")
    p.add_argument("--mesh", required=True, help="input mesh CSV")
    p.add_argument("--method", type=_parse_method, required=True,
                   help="one of: " + ", ".join(m.value for m in Method))
    p.add_argument("--width", type=int, help="grid width (default: inferred)")
    p.add_argument("--height", type=int, help="grid height (default: inferred)")
    p.add_argument("--out", required=True, help="output graymap")

    p = sub.add_parser("refine", help="full pipeline: estimate, then adaptive denoise")
    p.add_argument("--mesh", required=True, help="input mesh CSV")
    p.add_argument("--method", type=_parse_method, required=True,
                   help="one of: " + ", ".join(m.value for m in Method))
    p.add_argument("--init", help="reuse a precomputed initial estimate (.pgm)")
    p.add_argument("--width", type=int, help="grid width (default: inferred)")
    p.add_argument("--height", type=int, help="grid height (default: inferred)")
    p.add_argument("--params", help="key=value parameter file (default: stock values)")
    p.add_argument("--alpha", type=float, help="override strength scale")
    p.add_argument("--beta", type=float, help="override strength decay")
    p.add_argument("--lambda", dest="lam", type=float, help="override balance")
    _add_denoise_flags(p)
    p.add_argument("--out", required=True, help="output graymap")
    p.add_argument("--out-init", help="optional initial-estimate output")
    p.add_argument("--out-rmap", help="optional reliability map output (binary)")

    p = sub.add_parser("train", help="fit strength parameters on an image corpus")
    p.add_argument("--corpus", required=True, help="directory of .pgm images")
    p.add_argument("--method", type=_parse_method, required=True)
    p.add_argument("--ratios", type=_parse_floats, default=[0.3, 0.5],
                   help="training sample ratios (default 0.3,0.5)")
    _add_sim_flags(p)
    p.add_argument("--r-bins", type=int, default=64,
                   help="reliability bins for the gain surface (default 64)")
    p.add_argument("--denoiser", default="dct")
    p.add_argument("--out", required=True, help="output parameter file")

    p = sub.add_parser("evaluate", help="PSNR report over a corpus")
    p.add_argument("--corpus", required=True, help="directory of .pgm images")
    p.add_argument("--methods", type=_parse_methods,
                   default=list(Method), help="comma-separated methods (default: all)")
    p.add_argument("--ratios", type=_parse_floats, default=[0.3, 0.5])
    p.add_argument("--seeds", type=_parse_ints, default=[0])
    _add_sim_flags(p)
    _add_denoise_flags(p)
    p.add_argument("--params-dir",
                   help="directory of per-method parameter files named "
                        "<method>.txt (default: stock values)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out", required=True, help="output report CSV")

    p = sub.add_parser("psnr", help="print the PSNR between two graymaps")
    p.add_argument("image_a")
    p.add_argument("image_b")
    return parser


def _load_bounds(args) -> tuple[int, int] | None:
    if (args.width is None) != (args.height is None):
        raise ValueError("--width and --height must be given together")
    if args.width is None:
        return None
    return (args.width, args.height)


def _cmd_mesh_sim(args) -> int:
    img = load_image(args.image)
    filtered = antialias(img, args.phi)
    mesh, ref = simulate_mesh(filtered, SimConfig(args.ratio, args.seed, args.phi))
    save_mesh(mesh, args.out_mesh)
    if args.out_ref:
        save_image(ref, args.out_ref)
    if args.out_filtered:
        save_image(filtered, args.out_filtered)
    print(f"{len(mesh)} samples on a {ref.width}x{ref.height} grid", file=sys.stderr)
    return 0


def _cmd_reconstruct(args) -> int:
    mesh = load_mesh(args.mesh, bounds=_load_bounds(args))
    try:
        tri = build_delaunay(mesh)
    except DegenerateInputError:
        tri = None
    save_image(reconstruct_initial(mesh, tri, args.method), args.out)
    return 0


def _refine_params(args) -> ModelParams:
    if args.params:
        name, params, _ = load_params(args.params)
        if name != args.method.value.upper():
            raise ValueError(
                f"parameter file {args.params} is for method {name}, "
                f"not {args.method.value.upper()}"
            )
    else:
        params = default_params(args.method)
    if args.alpha is not None or args.beta is not None or args.lam is not None:
        params = ModelParams(
            params.alpha if args.alpha is None else args.alpha,
            params.beta if args.beta is None else args.beta,
            params.lam if args.lam is None else args.lam,
            params.sigma2_max,
        )
    return params


def _cmd_refine(args) -> int:
    mesh = load_mesh(args.mesh, bounds=_load_bounds(args))
    params = _refine_params(args)
    init = load_image(args.init) if args.init else None
    result = refine_pipeline(mesh, args.method, params, levels=args.levels,
                             denoiser=args.denoiser, init=init)
    save_image(result.refined, args.out)
    if args.out_init:
        save_image(result.init, args.out_init)
    if args.out_rmap:
        save_reliability(result.rmap, args.out_rmap)
    return 0


def _cmd_train(args) -> int:
    images = load_corpus_dir(args.corpus)
    pairs = make_training_pairs(images, args.ratios, seed=args.seed, phi=args.phi)
    result = fit_parameters(pairs, args.method, r_bins=args.r_bins,
                            denoiser=args.denoiser)
    save_training_result(args.out, result)
    p = result.params
    print(
        f"{args.method.value}: alpha={p.alpha:.4g} beta={p.beta:.4g} "
        f"lambda={p.lam:.4g} expected_gain={result.expected_gain:.6g}",
        file=sys.stderr,
    )
    return 0


def _cmd_evaluate(args) -> int:
    images = load_corpus_dir(args.corpus)
    if args.params_dir:
        store = {}
        for m in args.methods:
            path = f"{args.params_dir}/{m.value}.txt"
            try:
                name, params, _ = load_params(path)
            except FileNotFoundError:
                raise ValueError(
                    f"no parameters provided for method '{m.value}' "
                    f"(expected {path})"
                ) from None
            if name != m.value.upper():
                raise ValueError(f"{path} holds parameters for {name}, not {m.value}")
            store[m] = params
    else:
        store = default_params_store(args.methods)
    rows = evaluate(images, args.methods, args.ratios, args.seeds, store,
                    phi=args.phi, levels=args.levels, denoiser=args.denoiser,
                    jobs=args.jobs)
    write_report(rows, args.out)
    print(f"{len(rows)} rows -> {args.out}", file=sys.stderr)
    return 0


def _cmd_psnr(args) -> int:
    value = psnr(load_image(args.image_a), load_image(args.image_b))
    print("inf" if value == float("inf") else f"{value:.4f}")
    return 0


_COMMANDS = {
    "mesh-sim": _cmd_mesh_sim,
    "reconstruct": _cmd_reconstruct,
    "refine": _cmd_refine,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "psnr": _cmd_psnr,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError, DegenerateInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
