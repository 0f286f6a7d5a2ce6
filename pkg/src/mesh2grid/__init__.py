"""Image reconstruction from scattered samples with reliability-guided refinement.

The pipeline: triangulate the floating mesh, interpolate an initial
estimate onto the regular grid, score each pixel's reliability from local
sample density and value flatness, map reliability to a per-pixel
denoising strength, and denoise adaptively. Training fits the strength
parameters by maximizing the expected accumulated gain on a corpus.
"""

from .denoise import (
    DCT_THRESHOLD_FACTOR,
    SIGMA2_MAX_DEFAULT,
    ModelParams,
    StrengthMap,
    available_denoisers,
    denoise_at_sigma,
    refine,
    register_denoiser,
    strength_map,
)
from .grids import (
    Image,
    ImageFormatError,
    MeshParseError,
    MeshSamples,
    MeshValidationError,
    encode_image,
    load_image,
    load_mesh,
    make_mesh,
    psnr,
    save_image,
    save_mesh,
)
from .harness import (
    REPORT_HEADER,
    EvalRow,
    PipelineResult,
    SimConfig,
    antialias,
    antialias_taps,
    default_params_store,
    evaluate,
    format_report,
    load_corpus_dir,
    make_training_pairs,
    refine_pipeline,
    simulate_mesh,
    write_report,
)
from .interpolate import Method, reconstruct_initial
from .reliability import (
    E_TRIANGLE_MAX,
    ReliabilityMap,
    effective_data_global,
    effective_data_triangle,
    flatness,
    load_reliability,
    reliability_map,
    render_reliability,
    save_reliability,
)
from .synth import synthetic_corpus, synthetic_scene
from .training import (
    DEFAULT_PARAMS,
    GainSurface,
    ReliabilityHistogram,
    TrainingResult,
    build_gain_surface,
    default_params,
    expected_gain,
    fit_parameters,
    load_params,
    max_accumulated_gain,
    pixel_gain,
    save_params,
    save_training_result,
)
from .triangulation import (
    OUTSIDE_HULL,
    DegenerateInputError,
    Triangulation,
    barycentric,
    build_delaunay,
    locate,
    locate_grid,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PARAMS",
    "DegenerateInputError",
    "EvalRow",
    "GainSurface",
    "Image",
    "ImageFormatError",
    "MeshParseError",
    "MeshSamples",
    "MeshValidationError",
    "Method",
    "ModelParams",
    "DCT_THRESHOLD_FACTOR",
    "E_TRIANGLE_MAX",
    "OUTSIDE_HULL",
    "PipelineResult",
    "REPORT_HEADER",
    "ReliabilityHistogram",
    "ReliabilityMap",
    "SIGMA2_MAX_DEFAULT",
    "SimConfig",
    "StrengthMap",
    "TrainingResult",
    "Triangulation",
    "antialias",
    "antialias_taps",
    "available_denoisers",
    "barycentric",
    "build_delaunay",
    "build_gain_surface",
    "default_params",
    "default_params_store",
    "denoise_at_sigma",
    "effective_data_global",
    "effective_data_triangle",
    "encode_image",
    "evaluate",
    "expected_gain",
    "fit_parameters",
    "flatness",
    "format_report",
    "load_corpus_dir",
    "load_image",
    "load_mesh",
    "load_params",
    "load_reliability",
    "locate",
    "locate_grid",
    "make_mesh",
    "make_training_pairs",
    "max_accumulated_gain",
    "pixel_gain",
    "psnr",
    "reconstruct_initial",
    "refine",
    "refine_pipeline",
    "register_denoiser",
    "reliability_map",
    "render_reliability",
    "save_image",
    "save_mesh",
    "save_params",
    "save_reliability",
    "save_training_result",
    "simulate_mesh",
    "strength_map",
    "synthetic_corpus",
    "synthetic_scene",
    "write_report",
]
