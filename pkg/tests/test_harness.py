"""Mesh simulation protocol, the reconstruction pipeline, PSNR reports."""

import numpy as np
import pytest

from mesh2grid import (
    REPORT_HEADER,
    EvalRow,
    Image,
    Method,
    ModelParams,
    SimConfig,
    antialias,
    antialias_taps,
    build_delaunay,
    default_params,
    default_params_store,
    evaluate,
    format_report,
    load_corpus_dir,
    make_training_pairs,
    psnr,
    reconstruct_initial,
    refine,
    refine_pipeline,
    reliability_map,
    save_image,
    simulate_mesh,
    strength_map,
    synthetic_scene,
    write_report,
)


# -------------------------------------------------------------------- config


def test_sim_config_validation():
    SimConfig(ratio=1.0)
    SimConfig(ratio=0.3, seed=7, phi=4)
    with pytest.raises(ValueError):
        SimConfig(ratio=0.0)
    with pytest.raises(ValueError):
        SimConfig(ratio=1.2)
    with pytest.raises(ValueError):
        SimConfig(ratio=0.5, phi=1)
    with pytest.raises(ValueError):
        SimConfig(ratio=0.5, seed=-1)


# ---------------------------------------------------------------- antialias


def test_taps_shape_and_normalization():
    for phi in (2, 4, 5, 8):
        taps = antialias_taps(phi)
        assert taps.size == 4 * phi + 1
        assert np.array_equal(taps, taps[::-1])
        assert taps.sum() == pytest.approx(1.0, abs=1e-12)


def test_taps_stopband_attenuation():
    # cutoff is pi/phi; well above it the response must be tiny
    phi = 5
    taps = antialias_taps(phi)
    n = np.arange(taps.size) - 2 * phi
    f = 0.45  # cycles per sample, far beyond 0.1
    resp = np.abs(np.sum(taps * np.exp(-2j * np.pi * f * n)))
    assert resp < 0.02


def test_antialias_preserves_constants():
    img = Image(np.full((25, 25), 0.631))
    out = antialias(img, 5)
    np.testing.assert_allclose(out.data, 0.631, atol=1e-12)
    assert out.meta["antialias_phi"] == 5


def test_antialias_impulse_matches_separable_kernel():
    # An interior impulse paints the separable kernel, with negative lobes
    # clipped by the [0, 1] intensity invariant.
    phi = 5
    taps = antialias_taps(phi)
    data = np.zeros((64, 64))
    data[32, 32] = 1.0
    out = antialias(Image(data), phi).data
    want = np.clip(np.outer(taps, taps), 0.0, 1.0)
    got = out[32 - 2 * phi : 32 + 2 * phi + 1, 32 - 2 * phi : 32 + 2 * phi + 1]
    np.testing.assert_allclose(got, want, atol=1e-12)
    # nothing beyond the kernel support
    mask = np.ones((64, 64), dtype=bool)
    mask[32 - 2 * phi : 32 + 2 * phi + 1, 32 - 2 * phi : 32 + 2 * phi + 1] = False
    assert np.all(out[mask] == 0.0)


# ----------------------------------------------------------- mesh simulation


def test_simulate_small_grid_candidate_pool():
    img = Image(np.random.default_rng(0).uniform(size=(10, 10)))
    mesh, ref = simulate_mesh(img, SimConfig(ratio=0.5, seed=1, phi=5))
    assert ref.data.shape == (2, 2)
    # floor(0.5 * 4 + 0.5) = 2 samples from the 96 candidate positions
    assert len(mesh) == 2
    assert mesh.bounds == (2, 2)


def test_simulate_sample_count_formula():
    img = Image(np.random.default_rng(1).uniform(size=(100, 100)))
    mesh, ref = simulate_mesh(img, SimConfig(ratio=0.5, seed=0, phi=5))
    assert ref.data.shape == (20, 20)
    assert len(mesh) == 200
    mesh, _ = simulate_mesh(img, SimConfig(ratio=0.33, seed=0, phi=5))
    assert len(mesh) == 132


def test_simulate_trims_to_phi_multiples():
    img = Image(np.random.default_rng(2).uniform(size=(103, 101)))
    mesh, ref = simulate_mesh(img, SimConfig(ratio=0.4, seed=0, phi=5))
    assert ref.data.shape == (20, 20)
    assert mesh.bounds == (20, 20)


def test_simulate_reference_is_strided_slice():
    img = Image(np.random.default_rng(3).uniform(size=(40, 40)))
    _, ref = simulate_mesh(img, SimConfig(ratio=0.5, seed=0, phi=4))
    assert np.array_equal(ref.data, img.data[::4, ::4])


def test_simulate_never_lands_on_grid_positions():
    img = Image(np.random.default_rng(4).uniform(size=(60, 60)))
    mesh, _ = simulate_mesh(img, SimConfig(ratio=1.0, seed=5, phi=5))
    on_grid = (mesh.x == np.floor(mesh.x)) & (mesh.y == np.floor(mesh.y))
    assert not np.any(on_grid)


def test_simulate_values_come_from_filtered_image():
    img = Image(np.random.default_rng(5).uniform(size=(30, 30)))
    mesh, _ = simulate_mesh(img, SimConfig(ratio=0.7, seed=2, phi=3))
    rows = np.round(mesh.y * 3).astype(int)
    cols = np.round(mesh.x * 3).astype(int)
    assert np.array_equal(mesh.values, img.data[rows, cols])


def test_simulate_deterministic_and_seed_sensitive():
    img = Image(np.random.default_rng(6).uniform(size=(50, 50)))
    cfg = SimConfig(ratio=0.5, seed=11, phi=5)
    m1, _ = simulate_mesh(img, cfg)
    m2, _ = simulate_mesh(img, cfg)
    assert m1 == m2
    m3, _ = simulate_mesh(img, SimConfig(ratio=0.5, seed=12, phi=5))
    assert m1 != m3


def test_simulate_zero_samples_allowed():
    img = Image(np.random.default_rng(7).uniform(size=(10, 10)))
    mesh, _ = simulate_mesh(img, SimConfig(ratio=0.001, seed=0, phi=5))
    assert len(mesh) == 0


def test_simulate_image_smaller_than_phi():
    img = Image(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        simulate_mesh(img, SimConfig(ratio=0.5, phi=5))


# ------------------------------------------------------------------ pipeline


def test_refine_pipeline_equals_manual_composition():
    scene = synthetic_scene(size=64, seed=8)
    filtered = antialias(scene, 4)
    mesh, ref = simulate_mesh(filtered, SimConfig(ratio=0.5, seed=0, phi=4))
    params = default_params(Method.LIN)
    res = refine_pipeline(mesh, Method.LIN, params)
    tri = build_delaunay(mesh)
    init = reconstruct_initial(mesh, tri, Method.LIN)
    rmap = reliability_map(tri, mesh, mesh.bounds, params.lam)
    smap = strength_map(rmap, params)
    refined = refine(init, smap)
    assert np.array_equal(res.init.data, init.data)
    assert np.array_equal(res.refined.data, refined.data)
    assert np.array_equal(res.sigma2, smap.sigma2)
    assert np.array_equal(res.rmap.r, rmap.r)


def test_refine_pipeline_accepts_precomputed_init():
    scene = synthetic_scene(size=48, seed=9)
    filtered = antialias(scene, 4)
    mesh, _ = simulate_mesh(filtered, SimConfig(ratio=0.5, seed=0, phi=4))
    tri = build_delaunay(mesh)
    init = reconstruct_initial(mesh, tri, Method.IDW)
    params = default_params(Method.IDW)
    res = refine_pipeline(mesh, Method.IDW, params, init=init)
    assert res.init is init


def test_refine_pipeline_rejects_mismatched_init():
    scene = synthetic_scene(size=48, seed=9)
    filtered = antialias(scene, 4)
    mesh, _ = simulate_mesh(filtered, SimConfig(ratio=0.5, seed=0, phi=4))
    bad = Image(np.zeros((5, 5)))
    with pytest.raises(ValueError):
        refine_pipeline(mesh, Method.IDW, default_params(Method.IDW), init=bad)


def test_make_training_pairs_shapes(small_corpus):
    pairs = make_training_pairs(small_corpus, ratios=[0.3, 0.5], seed=0, phi=4)
    assert len(pairs) == len(small_corpus) * 2
    for clean, mesh in pairs:
        assert isinstance(clean, Image)
        assert mesh.bounds == (clean.width, clean.height)
        assert clean.data.shape == (40, 40)  # 160 / 4


# ---------------------------------------------------------------- evaluation


@pytest.fixture(scope="module")
def tiny_images():
    return [("a", synthetic_scene(48, 21)), ("b", synthetic_scene(48, 22))]


def test_evaluate_requires_params(tiny_images):
    store = {Method.LIN: default_params(Method.LIN)}
    with pytest.raises(ValueError, match="'nnb'"):
        evaluate(tiny_images, [Method.LIN, Method.NNB], [0.5], [0], store, phi=4)


def test_evaluate_rows_sorted_and_complete(tiny_images):
    methods = [Method.NNB, Method.LIN]
    rows = evaluate(
        tiny_images,
        methods,
        [0.5, 0.3],
        [1, 0],
        default_params_store(methods),
        phi=4,
    )
    assert len(rows) == 2 * 2 * 2 * 2
    keys = [(r.image, r.method, r.ratio, r.seed) for r in rows]
    assert keys == sorted(keys)
    assert {r.method for r in rows} == {"lin", "nnb"}


def test_report_format_and_gain_identity(tiny_images):
    methods = [Method.LIN]
    rows = evaluate(
        tiny_images, methods, [0.5], [0], default_params_store(methods), phi=4
    )
    text = format_report(rows)
    lines = text.strip().split("\n")
    assert lines[0] == REPORT_HEADER
    assert len(lines) == 1 + len(rows)
    for line in lines[1:]:
        cells = line.split(",")
        assert len(cells) == 7
        # printed gain must equal the printed PSNR difference exactly
        assert f"{float(cells[5]) - float(cells[4]):.4f}" == cells[6]


def test_write_report_round_trip(tmp_path, tiny_images):
    methods = [Method.LIN]
    rows = evaluate(
        tiny_images, methods, [0.5], [0], default_params_store(methods), phi=4
    )
    path = tmp_path / "report.csv"
    write_report(rows, path)
    assert path.read_text() == format_report(rows)


def test_evaluate_parallel_matches_serial(tiny_images):
    methods = [Method.LIN, Method.NNB]
    store = default_params_store(methods)
    serial = evaluate(tiny_images, methods, [0.5], [0, 1], store, phi=4, jobs=1)
    parallel = evaluate(tiny_images, methods, [0.5], [0, 1], store, phi=4, jobs=2)
    assert format_report(serial) == format_report(parallel)
    assert all(a == b for a, b in zip(serial, parallel))


def test_eval_row_gain_property():
    row = EvalRow("img", "lin", 0.5, 0, 30.0, 31.25)
    assert row.gain_db == pytest.approx(1.25, abs=1e-12)


def test_refinement_helps_on_synthetic_scene():
    # One end-to-end sanity run: the refined estimate should beat the
    # initial one on a structured scene at a moderate ratio.
    scene = synthetic_scene(size=128, seed=31)
    filtered = antialias(scene, 4)
    mesh, ref = simulate_mesh(filtered, SimConfig(ratio=0.4, seed=0, phi=4))
    res = refine_pipeline(mesh, Method.NNB, default_params(Method.NNB))
    assert psnr(res.refined, ref) > psnr(res.init, ref)


# ------------------------------------------------------------------- corpus


def test_load_corpus_dir(tmp_path):
    save_image(Image(np.full((8, 8), 0.25)), tmp_path / "b.pgm")
    save_image(Image(np.full((8, 8), 0.75)), tmp_path / "a.pgm")
    corpus = load_corpus_dir(tmp_path)
    assert [name for name, _ in corpus] == ["a", "b"]
    assert corpus[0][1].data[0, 0] == pytest.approx(0.75, abs=1 / 255)


def test_load_corpus_dir_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus_dir(tmp_path / "missing")
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(FileNotFoundError):
        load_corpus_dir(empty)


def test_default_params_store_values():
    store = default_params_store([Method.LIN, Method.MBS])
    assert store[Method.LIN].alpha == 214.0
    assert store[Method.MBS].lam == 0.3
