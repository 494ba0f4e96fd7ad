import numpy as np
import pytest
from hypothesis import given, strategies as st

from waveseg.errors import ConfigError, ConstantImageError, PlacementError
from waveseg.metrics import misclassification
from waveseg.phantom import PhantomSpec, make_phantom, otsu_binarize, otsu_threshold_from_histogram


def test_noiseless_minefield_two_values():
    li = make_phantom(PhantomSpec(kind="minefield", seed=3))
    assert sorted(np.unique(li.image).tolist()) == [0.25, 0.75]
    assert np.array_equal(li.truth == 1, li.image > 0.5)
    assert li.regions == {0: "background", 1: "mine"}


@given(st.integers(0, 10_000))
def test_minefield_area(seed):
    s = PhantomSpec(kind="minefield", seed=seed)
    li = make_phantom(s)
    expected = s.mines * np.pi * s.mine_radius**2 / (s.width * s.height)
    assert abs(li.truth.mean() - expected) <= 0.2 * expected


def test_determinism():
    s = PhantomSpec(kind="minefield", noise_sigma=0.2, seed=11)
    a, b = make_phantom(s), make_phantom(s)
    assert np.array_equal(a.image, b.image) and np.array_equal(a.truth, b.truth)
    assert not np.array_equal(a.image, make_phantom(PhantomSpec(kind="minefield", noise_sigma=0.2, seed=12)).image)


def test_noise_is_clipped():
    li = make_phantom(PhantomSpec(kind="minefield", noise_sigma=0.5, seed=0))
    assert li.image.min() >= 0 and li.image.max() <= 1


def test_placement_failure():
    with pytest.raises(PlacementError):
        make_phantom(PhantomSpec(kind="minefield", mines=40, mine_radius=8))


def test_bad_spec():
    with pytest.raises(ConfigError):
        PhantomSpec(kind="spiral")
    with pytest.raises(ConfigError):
        PhantomSpec(noise_sigma=-1)
    with pytest.raises(ConfigError):
        PhantomSpec(width=0)


def test_disk_centred():
    li = make_phantom(PhantomSpec(kind="disk"))
    assert li.truth[32, 32] == 1 and li.truth[0, 0] == 0
    assert li.truth.sum() == pytest.approx(np.pi * 16**2, rel=0.05)


def test_composite_regions():
    s = PhantomSpec(kind="composite")
    li = make_phantom(s)
    assert li.regions == {0: "background", 1: "texture", 2: "blob"}
    frac = {k: float((li.truth == k).mean()) for k in (1, 2)}
    assert frac[1] == pytest.approx(s.band_fraction, abs=1 / 64)
    assert frac[2] == pytest.approx(np.pi * s.blob_radius**2 / 64**2, rel=0.1)
    # the band is darker than the background and the blob brighter
    bg = li.image[li.truth == 0]
    assert li.image[li.truth == 1].mean() < bg.mean() < li.image[li.truth == 2].mean()
    # the band carries high-frequency texture; the blob is smooth
    band = li.image[:, 4:23]
    assert np.abs(np.diff(band, axis=1)).mean() > 0.1
    blob = li.image[20:44, 35:60]
    assert np.abs(np.diff(blob, axis=1)).mean() < 0.25 * np.abs(np.diff(band, axis=1)).mean()


def test_otsu_two_values():
    img = np.where(np.arange(64).reshape(8, 8) % 3 == 0, 0.8, 0.2)
    mask, t = otsu_binarize(img)
    assert 0.2 < t < 0.8
    assert np.array_equal(mask, img == 0.8)


def test_otsu_gaussian_mixture():
    g = np.random.default_rng(4)
    truth = g.random((128, 128)) < 0.4
    img = np.where(truth, 0.75, 0.25) + g.normal(0, 0.05, truth.shape)
    mask, _ = otsu_binarize(img)
    assert misclassification(mask.astype(int), truth.astype(int), 2).misclassification_rate <= 0.01


def test_otsu_constant():
    with pytest.raises(ConstantImageError):
        otsu_binarize(np.full((4, 4), 0.3))
    with pytest.raises(ConfigError):
        otsu_binarize(np.arange(4.0), bins=1)


def test_otsu_tie_goes_low():
    # symmetric histogram with an empty middle: every edge in the gap ties
    counts = np.array([5, 0, 0, 5])
    edges = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    assert otsu_threshold_from_histogram(counts, edges) == 1.0


@given(st.lists(st.integers(0, 50), min_size=4, max_size=12).filter(lambda c: sum(1 for v in c if v) >= 2))
def test_otsu_depends_only_on_histogram(counts):
    counts = np.array(counts)
    n = len(counts)
    a = np.linspace(0, 1, n + 1)
    b = np.cumsum(np.r_[0, np.random.default_rng(n).uniform(0.5, 2, n)])
    ka = np.searchsorted(a, otsu_threshold_from_histogram(counts, a)) - 1
    kb = np.searchsorted(b, otsu_threshold_from_histogram(counts, b)) - 1
    # same split of the bins whenever the bin centres are equally spaced in both
    if np.allclose(np.diff(b), np.diff(b)[0]):
        assert ka == kb
    assert 0 <= ka < n - 1
