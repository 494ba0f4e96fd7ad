import numpy as np
import pytest
from hypothesis import given, strategies as st

from waveseg.acwe import (
    AcweParams,
    acwe_energy,
    acwe_w,
    curvature,
    init_levelset,
    region_means,
    regularized_delta,
    regularized_heaviside,
)
from waveseg.errors import ConfigError, DegenerateRegionError, DimensionError
from waveseg.metrics import dice
from waveseg.phantom import PhantomSpec, make_phantom
from waveseg.wavelets import feature_field


@given(st.floats(-50, 50), st.floats(0.1, 5))
def test_heaviside_symmetry(z, eps):
    assert regularized_heaviside(0.0, eps) == 0.5
    assert regularized_heaviside(z, eps) + regularized_heaviside(-z, eps) == pytest.approx(1.0)
    assert 0 < regularized_heaviside(z, eps) < 1


@given(st.floats(-20, 20), st.floats(0.2, 5))
def test_delta_is_heaviside_derivative(z, eps):
    h = 1e-4
    fd = (regularized_heaviside(z + h, eps) - regularized_heaviside(z - h, eps)) / (2 * h)
    assert abs(fd - regularized_delta(z, eps)) < 1e-6
    assert regularized_delta(z, eps) >= 0


def test_region_means_examples():
    F = np.array([[0.0, 0.0, 10.0, 10.0]])
    phi = np.array([[-50.0, -50.0, 50.0, 50.0]])
    m1, m2 = region_means(F, phi)
    assert m1[0] == pytest.approx(10.0, abs=0.1)
    assert m2[0] == pytest.approx(0.0, abs=0.1)
    m1, m2 = region_means(F, phi, eps=None)
    assert (m1[0], m2[0]) == (10.0, 0.0)
    c = np.full((3, 3), 0.7)
    m1, m2 = region_means(c, np.arange(9.0).reshape(3, 3) - 4)
    assert m1[0] == pytest.approx(0.7) and m2[0] == pytest.approx(0.7)


def test_all_foreground():
    F = np.random.default_rng(0).random((4, 4))
    with pytest.raises(DegenerateRegionError):
        region_means(F, np.full((4, 4), 1e300))
    with pytest.raises(DegenerateRegionError):
        region_means(F, np.full((4, 4), 1.0), eps=None)
    m1, _ = region_means(F, np.full((4, 4), 1e3))
    assert m1[0] == pytest.approx(F.mean(), rel=1e-3)


def test_region_means_shape_checked():
    with pytest.raises(DimensionError):
        region_means(np.zeros((4, 4)), np.zeros((4, 5)))


@given(st.integers(0, 2**31 - 1))
def test_region_means_convex(seed):
    g = np.random.default_rng(seed)
    F = g.standard_normal((6, 6, 3))
    phi = g.standard_normal((6, 6)) * 3
    phi[0, 0], phi[0, 1] = 1.0, -1.0
    for eps in (1.0, None):
        for m in region_means(F, phi, eps):
            assert (m >= F.min(axis=(0, 1)) - 1e-12).all()
            assert (m <= F.max(axis=(0, 1)) + 1e-12).all()


def test_curvature_affine_and_constant():
    y, x = np.mgrid[0:20, 0:20].astype(float)
    k = curvature(0.3 * x - 1.7 * y)
    assert np.abs(k[2:-2, 2:-2]).max() < 1e-12
    assert not curvature(np.full((8, 8), 2.5)).any()


@pytest.mark.parametrize("R", [8, 12, 20])
def test_curvature_circle(R):
    n = 4 * R
    y, x = np.mgrid[0:n, 0:n].astype(float)
    d = np.hypot(x - n / 2, y - n / 2)
    k = curvature(R - d)
    ring = np.abs(d - R) < 0.5
    # curvature of the outward-negative signed distance is -1/R
    assert np.abs(-k[ring] - 1.0 / R).max() <= 0.1 / R


def test_curvature_bounded(rng):
    assert np.abs(curvature(rng.standard_normal((30, 30)))).max() <= 2.0 + 1e-12


def test_init_circle():
    phi = init_levelset(20, 16, "circle", radius=5)
    assert phi[8, 10] == 5.0
    y, x = np.mgrid[0:16, 0:20]
    d = np.hypot(x - 10, y - 8)
    assert (phi[d < 4.9] > 0).all() and (phi[d > 5.1] < 0).all()
    assert init_levelset(30, 30)[15, 15] == 10.0


def test_init_checkerboard():
    phi = init_levelset(32, 32, "checkerboard")
    assert (phi > 0).any() and (phi < 0).any()
    with pytest.raises(ConfigError):
        init_levelset(8, 8, "star")
    with pytest.raises(DimensionError):
        init_levelset(0, 8)


def test_params_validated():
    for bad in (dict(mu=-1), dict(eps=0), dict(dt=0), dict(lambda1=-1), dict(max_iter=-1),
                dict(window=0)):
        with pytest.raises(ConfigError):
            AcweParams(**bad)


def _disk():
    return make_phantom(PhantomSpec(kind="disk"))


def test_disk_segmentation_mu_point_one():
    li = _disk()
    r = acwe_w(li.image, init_levelset(64, 64), AcweParams(mu=0.1, max_iter=500))
    assert dice(r.mask, li.truth == 1) >= 0.99
    assert abs(r.mean_in[0] - 0.75) < 1e-2 and abs(r.mean_out[0] - 0.25) < 1e-2
    assert np.array_equal(r.mask, r.phi >= 0)


def test_constant_image_is_stable():
    img = np.full((16, 16), 0.4)
    r = acwe_w(img, init_levelset(16, 16), AcweParams(max_iter=200, window=5))
    assert r.converged and r.iterations == 5
    assert np.array_equal(r.mask, init_levelset(16, 16) >= 0)
    assert r.mean_in[0] == pytest.approx(r.mean_out[0])


def test_length_only_shrinks():
    img = np.random.default_rng(1).random((40, 40))
    areas = []
    p = AcweParams(lambda1=0, lambda2=0, mu=1.0, max_iter=150, stop_tol=0)
    acwe_w(img, init_levelset(40, 40, radius=12), p, callback=lambda it, phi: areas.append((phi >= 0).sum()))
    tail = np.array(areas[5:])
    assert (np.diff(tail) <= 0).all()
    assert tail[-1] < areas[0]


def _scalar_chan_vese(img, phi, mu, dt, eps, n):
    for _ in range(n):
        inside = phi >= 0
        h = inside.astype(np.float64).ravel()
        flat = img.ravel()
        c1 = (h * flat).sum() / h.sum()
        c2 = ((1.0 - h) * flat).sum() / (1.0 - h).sum()
        force = (img - c2) ** 2 - (img - c1) ** 2
        phi = phi + dt * regularized_delta(phi, eps) * (mu * curvature(phi) + force)
    return phi


def test_intensity_path_matches_scalar_chan_vese():
    li = make_phantom(PhantomSpec(kind="disk", noise_sigma=0.1, seed=2))
    phi0 = init_levelset(64, 64, radius=10)
    p = AcweParams(mu=0.2, dt=0.5, max_iter=10, stop_tol=0)
    r = acwe_w(feature_field(li.image, None, 0), phi0, p)
    ref = _scalar_chan_vese(li.image, phi0, 0.2, 0.5, 1.0, 10)
    assert np.array_equal(r.phi, ref)


def test_shift_equivariance_without_length_term():
    li = make_phantom(PhantomSpec(kind="disk", noise_sigma=0.1, seed=5))
    phi0 = init_levelset(64, 64, "checkerboard")
    p = AcweParams(mu=0.0, max_iter=40, stop_tol=0)
    a = acwe_w(li.image, phi0, p)
    b = acwe_w(li.image + 0.5, phi0, p)
    assert np.array_equal(a.mask, b.mask)


def test_energy_trace_and_determinism():
    li = make_phantom(PhantomSpec(kind="disk", noise_sigma=0.05, seed=1))
    a = acwe_w(li.image, init_levelset(64, 64), AcweParams(max_iter=60))
    b = acwe_w(li.image, init_levelset(64, 64), AcweParams(max_iter=60))
    assert np.array_equal(a.phi, b.phi) and a.energy_trace == b.energy_trace
    assert len(a.energy_trace) == a.iterations + 1
    assert a.energy_trace[-1] < a.energy_trace[0]


def test_energy_prefers_truth():
    li = _disk()
    truth_phi = np.where(li.truth == 1, 1.0, -1.0)
    assert acwe_energy(li.image, truth_phi) == pytest.approx(0.0, abs=1e-12)
    assert acwe_energy(li.image, init_levelset(64, 64)) > 1.0


def test_nonfinite_features_rejected():
    img = np.zeros((8, 8))
    img[0, 0] = np.nan
    with pytest.raises(ConfigError):
        acwe_w(img, init_levelset(8, 8))
