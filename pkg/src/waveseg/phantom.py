"""Synthetic test images with ground truth, and Otsu binarisation."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError, ConstantImageError, PlacementError


@dataclass
class PhantomSpec:
    kind: str = "minefield"  # minefield | disk | composite
    width: int = 64
    height: int = 64
    noise_sigma: float = 0.0
    seed: int = 0
    # minefield
    mines: int = 6
    mine_radius: float = 5.0
    # disk
    disk_radius: float | None = None  # default min(w, h) / 4
    # minefield / disk intensities
    background: float = 0.25
    foreground: float = 0.75
    # composite
    composite_background: float = 0.5
    blob_radius: float = 11.0
    blob_contrast: float = 0.4
    blob_edge: float = 3.0
    texture_period: float = 4.0
    texture_amplitude: float = 0.15
    texture_mean: float = -0.3  # offset from composite_background
    band_fraction: float = 0.3
    band_margin: float = 0.0625  # gap between band and the left border, fraction of width

    def __post_init__(self):
        if self.kind not in ("minefield", "disk", "composite"):
            raise ConfigError(f"unknown phantom kind {self.kind!r}")
        if self.width < 1 or self.height < 1:
            raise ConfigError("phantom dimensions must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")


@dataclass
class LabeledImage:
    image: np.ndarray
    truth: np.ndarray
    regions: dict[int, str]
    spec: dict = field(default_factory=dict)


def _grid(h, w):
    y, x = np.mgrid[0:h, 0:w].astype(np.float64)
    return y, x


def _minefield(s: PhantomSpec, rng):
    h, w, r = s.height, s.width, s.mine_radius
    y, x = _grid(h, w)
    centres: list[tuple[float, float]] = []
    attempts = 0
    while len(centres) < s.mines:
        attempts += 1
        if attempts > 10 * max(s.mines, 1):
            raise PlacementError(
                f"placed {len(centres)} of {s.mines} mines of radius {r} in {w}x{h}"
            )
        cy = rng.uniform(r, h - 1 - r)
        cx = rng.uniform(r, w - 1 - r)
        if all(np.hypot(cy - a, cx - b) > 2 * r + 1 for a, b in centres):
            centres.append((cy, cx))
    truth = np.zeros((h, w), dtype=np.int64)
    for cy, cx in centres:
        truth[np.hypot(y - cy, x - cx) <= r] = 1
    img = np.where(truth == 1, s.foreground, s.background)
    return img, truth, {0: "background", 1: "mine"}


def _disk(s: PhantomSpec):
    h, w = s.height, s.width
    r = min(h, w) / 4.0 if s.disk_radius is None else s.disk_radius
    y, x = _grid(h, w)
    truth = (np.hypot(y - h // 2, x - w // 2) <= r).astype(np.int64)
    img = np.where(truth == 1, s.foreground, s.background)
    return img, truth, {0: "background", 1: "disk"}


def _composite(s: PhantomSpec):
    """Mid-grey background, a dark textured band and a bright smooth blob.

    The band is a vertical-stripe grating (mean ``texture_mean`` relative to the
    background) kept clear of the image border so its two edges are alike
    under periodic extension. The blob is a disk with a raised-cosine edge
    whose truth boundary sits at half contrast.
    """
    h, w = s.height, s.width
    y, x = _grid(h, w)
    x0 = int(round(s.band_margin * w))
    x1 = x0 + int(round(s.band_fraction * w))
    truth = np.zeros((h, w), dtype=np.int64)
    img = np.full((h, w), s.composite_background)

    band = (x >= x0) & (x < x1)
    grating = s.texture_mean + s.texture_amplitude * np.sin(2 * np.pi * (x - x0) / s.texture_period)
    img[band] += grating[band]
    truth[band] = 1

    cx = x1 + (w - x1) / 2.0
    cy = h / 2.0
    d = np.hypot(y - cy, x - cx)
    t = np.clip((d - s.blob_radius) / s.blob_edge + 0.5, 0.0, 1.0)
    img += s.blob_contrast * 0.5 * (1 + np.cos(np.pi * t))
    truth[(d <= s.blob_radius) & ~band] = 2
    return img, truth, {0: "background", 1: "texture", 2: "blob"}


def make_phantom(spec: PhantomSpec) -> LabeledImage:
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "minefield":
        img, truth, regions = _minefield(spec, rng)
    elif spec.kind == "disk":
        img, truth, regions = _disk(spec)
    else:
        img, truth, regions = _composite(spec)
    if spec.noise_sigma > 0:
        img = img + rng.normal(0.0, spec.noise_sigma, img.shape)
    img = np.clip(img, 0.0, 1.0)
    return LabeledImage(img, truth, regions, asdict(spec))


def otsu_threshold_from_histogram(counts, edges) -> float:
    """Threshold (a bin edge) maximising between-class variance.

    Ties resolve to the lowest maximising edge.
    """
    counts = np.asarray(counts, dtype=np.float64)
    centres = 0.5 * (edges[:-1] + edges[1:])
    total = counts.sum()
    w0 = np.cumsum(counts)[:-1] / total
    w1 = 1.0 - w0
    csum = np.cumsum(counts * centres)[:-1]
    mean_total = (counts * centres).sum() / total
    with np.errstate(divide="ignore", invalid="ignore"):
        m0 = csum / (w0 * total)
        m1 = (mean_total * total - csum) / (w1 * total)
        between = w0 * w1 * (m0 - m1) ** 2
    between = np.where((w0 > 0) & (w1 > 0), between, -np.inf)
    best = between.max()
    # exact ties only; float noise between equal-mass splits is not a tie
    k = int(np.flatnonzero(between >= best - 1e-12 * abs(best))[0])
    return float(edges[k + 1])


def otsu_binarize(img, bins: int = 256):
    """Return ``(mask, threshold)`` with ``mask = img > threshold``."""
    img = np.asarray(img, dtype=np.float64)
    if bins < 2:
        raise ConfigError("Otsu needs at least two bins")
    lo, hi = float(img.min()), float(img.max())
    if lo == hi:
        raise ConstantImageError("Otsu threshold undefined for a constant image")
    counts, edges = np.histogram(img, bins=bins, range=(lo, hi))
    t = otsu_threshold_from_histogram(counts, edges)
    return img > t, t
