import math

import numpy as np
import pytest

from admd.synth import (
    MC_ALGORITHMS,
    SIGNAL_LENGTH,
    GaussianTarget,
    NoiseSpec,
    RectTarget,
    SceneSpec,
    StepEdge,
    detection_scene,
    evaluate_1d,
    gen_noise,
    noise_mc_1d,
    render,
)


def test_render_constant_background():
    img, gt = render(SceneSpec(20, 10, background=10.0))
    assert img.shape == (10, 20)
    assert (img == 10).all()
    assert gt.targets == []


def test_render_vertical_step():
    img, _ = render(SceneSpec(100, 40, 50.0, [StepEdge("vertical", 50, 200.0)]))
    assert (img[:, :50] == 50).all()
    assert (img[:, 50:] == 200).all()


def test_render_horizontal_step():
    img, _ = render(SceneSpec(30, 30, 5.0, [StepEdge("horizontal", 12, 9.0)]))
    assert (img[:12] == 5).all() and (img[12:] == 9).all()


def test_render_gaussian_target_values():
    t = GaussianTarget(32, 32, 1.5, 80.0)
    img, gt = render(SceneSpec(64, 64, 30.0, [t]))
    assert img[32, 32] == pytest.approx(110.0)
    for dy, dx in [(0, 1), (1, 1), (2, 0), (3, 2)]:
        expected = 30 + 80 * math.exp(-(dx * dx + dy * dy) / (2 * 1.5 ** 2))
        assert img[32 + dy, 32 + dx] == pytest.approx(expected, rel=1e-6)
    # radial decay along a row
    row = img[32, 32:45]
    assert np.all(np.diff(row) <= 0)
    (box,) = gt.targets
    assert (box.x, box.y, box.w, box.h) == (29, 29, 7, 7)


def test_render_rect_target_and_gt():
    img, gt = render(SceneSpec(40, 30, 30.0, [RectTarget(5, 6, 4, 3, 80.0)]))
    assert (img[6:9, 5:9] == 110).all()
    assert img.sum() == 30 * 40 * 30 + 80 * 12
    (box,) = gt.targets
    assert (box.x, box.y, box.w, box.h) == (5, 6, 4, 3)


def test_render_is_deterministic_per_seed():
    spec = SceneSpec(32, 32, 30.0, [RectTarget(10, 10, 3, 3, 50)], NoiseSpec("gaussian", 4), 7)
    a, _ = render(spec)
    b, _ = render(spec)
    assert a.tobytes() == b.tobytes()
    spec.rng_seed = 8
    c, _ = render(spec)
    assert a.tobytes() != c.tobytes()


@pytest.mark.parametrize("element", [
    RectTarget(30, 0, 5, 5, 1.0),
    RectTarget(-1, 0, 2, 2, 1.0),
    GaussianTarget(40.0, 3.0, 1.0, 1.0),
    StepEdge("vertical", 33, 1.0),
    StepEdge("diagonal", 3, 1.0),
    RectTarget(1, 1, 2, 2, float("nan")),
])
def test_render_rejects_bad_elements(element):
    with pytest.raises(ValueError):
        render(SceneSpec(32, 32, 0.0, [element]))


def test_scene_from_dict_short_keys():
    spec = SceneSpec.from_dict({"bg": 30, "w": 64, "h": 48})
    assert (spec.width, spec.height, spec.background) == (64, 48, 30.0)
    with pytest.raises(ValueError):
        SceneSpec.from_dict({"w": 4, "h": 4, "elements": [{"type": "blob"}]})


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", 0.0)
    with pytest.raises(ValueError):
        NoiseSpec("laplace", 1.0)
    with pytest.raises(ValueError):
        gen_noise(NoiseSpec(), 0, 1)


def test_gen_noise_gaussian_moments():
    x = gen_noise(NoiseSpec("gaussian", 3.0), 10 ** 6, 1)
    assert abs(x.mean()) < 0.02
    assert x.std() == pytest.approx(3.0, rel=0.01)


def test_gen_noise_poisson_moments():
    x = gen_noise(NoiseSpec("poisson", 3.0), 10 ** 6, 2)
    assert x.mean() == pytest.approx(3.0, rel=0.01)
    assert x.var() == pytest.approx(3.0, rel=0.01)


def test_gen_noise_rayleigh_mean():
    x = gen_noise(NoiseSpec("rayleigh", 3.0), 10 ** 6, 3)
    assert x.mean() == pytest.approx(3 * math.sqrt(math.pi / 2), rel=0.01)


def test_gen_noise_deterministic():
    d = NoiseSpec("rayleigh", 2.0)
    np.testing.assert_array_equal(gen_noise(d, 100, 5), gen_noise(d, 100, 5))


# --- 1-D Monte Carlo --------------------------------------------------------

@pytest.mark.parametrize("alg", MC_ALGORITHMS)
def test_constant_signal_gives_zero(alg):
    out = evaluate_1d(alg, np.full((4, SIGNAL_LENGTH), 7.0))
    np.testing.assert_array_equal(out, 0.0)


def test_evaluate_1d_hand_values():
    sig = np.zeros(SIGNAL_LENGTH)
    mid = SIGNAL_LENGTH // 2
    sig[mid - 4:mid + 5] = 10.0        # centre cell
    sig[mid - 13:mid - 4] = 4.0        # left cell
    sig[mid + 5:mid + 14] = 12.0       # right cell
    assert evaluate_1d("AAGD", sig)[0] == pytest.approx(4.0)   # (10 - 8)^2
    assert evaluate_1d("ADMD", sig)[0] == pytest.approx(4.0)   # min(36, 4)
    assert evaluate_1d("ADMD+", sig)[0] == 0.0                 # right gap negative


def test_admd_plus_nonnegative_and_below_admd():
    rng = np.random.default_rng(0)
    sig = rng.normal(0, 3, (5000, SIGNAL_LENGTH))
    plus = evaluate_1d("ADMD+", sig)
    plain = evaluate_1d("ADMD", sig)
    assert (plus >= 0).all()
    assert (plus <= plain).all()
    # the unsuppressed variant responds to dark dips, the suppressed one does not
    assert ((plain > 0) & (plus == 0)).any()


def test_evaluate_1d_rejects_bad_geometry():
    with pytest.raises(ValueError):
        evaluate_1d("ADMD", np.zeros((1, 20)), cell=9)
    with pytest.raises(ValueError):
        evaluate_1d("ADMD", np.zeros((1, 63)), cell=9, aagd_bg=25)
    with pytest.raises(ValueError):
        evaluate_1d("ADMD", np.zeros((1, 63)), cell=4)
    with pytest.raises(ValueError):
        evaluate_1d("LCM", np.zeros((1, 63)))


def test_noise_mc_deterministic_and_chunk_independent():
    d = NoiseSpec("poisson", 3.0)
    a = noise_mc_1d("ADMD+", d, 25_000, seed=4)
    b = noise_mc_1d("ADMD+", d, 25_000, seed=4)
    assert a == b
    assert noise_mc_1d("ADMD+", d, 25_000, seed=5) != a


def test_noise_mc_aagd_gaussian_mean_matches_theory():
    # centre mean minus flank mean has variance sigma^2 (1/9 + 1/18) for cell 9
    sigma = 3.0
    mean, _ = noise_mc_1d("AAGD", NoiseSpec("gaussian", sigma), 100_000, seed=1)
    assert mean == pytest.approx(sigma ** 2 * (1 / 9 + 1 / 18), rel=0.02)


def test_noise_mc_rejects_large_cell():
    with pytest.raises(ValueError):
        noise_mc_1d("ADMD", NoiseSpec(), 10, cell=23, aagd_bg=69)


def test_detection_scene_layout():
    for seed in range(10):
        spec = detection_scene(seed)
        edge, target = spec.elements
        assert target.amplitude >= 6 * spec.noise.param
        pos = target.x if edge.orientation == "vertical" else target.y
        assert abs(pos - edge.position) > 14
        assert 16 <= target.x <= spec.width - 16 and 16 <= target.y <= spec.height - 16
        img, gt = render(spec)
        assert len(gt.targets) == 1
