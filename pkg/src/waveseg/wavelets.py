"""Multi-level periodic 2-D wavelet transform and per-pixel wavelet-tree features.

Images are plain 2-D float arrays ``(height, width)``. Sub-band names follow
the two-letter convention where the first letter is the filter applied along
rows (horizontal direction) and the second the filter along columns: ``HL`` is
horizontally high-pass and vertically low-pass.
"""
from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError, FormatError
from .filterbank import FilterPair, analysis_1d, periodic_filter, synthesis_1d

BANDS = ("HL", "LH", "HH")


@dataclass
class WaveletPyramid:
    """``approx`` is LL_K; ``details[k-1]`` holds ``(HL_k, LH_k, HH_k)``."""

    approx: np.ndarray
    details: list[tuple[np.ndarray, np.ndarray, np.ndarray]]

    @property
    def levels(self) -> int:
        return len(self.details)

    @property
    def shape(self) -> tuple[int, int]:
        h, w = self.approx.shape
        return h << self.levels, w << self.levels

    def coefficient_count(self) -> int:
        return self.approx.size + sum(b.size for lvl in self.details for b in lvl)

    def mosaic(self) -> np.ndarray:
        """Critically sampled layout: LL_K top-left, HL right, LH below, HH diagonal."""
        out = np.zeros(self.shape)
        h, w = self.approx.shape
        out[:h, :w] = self.approx
        for k in range(self.levels, 0, -1):
            hl, lh, hh = self.details[k - 1]
            h, w = hl.shape
            out[:h, w : 2 * w] = hl
            out[h : 2 * h, :w] = lh
            out[h : 2 * h, w : 2 * w] = hh
        return out

    @classmethod
    def from_mosaic(cls, m: np.ndarray, levels: int) -> "WaveletPyramid":
        h, w = m.shape
        _check_divisible((h, w), levels)
        details = []
        for k in range(1, levels + 1):
            bh, bw = h >> k, w >> k
            details.append(
                (
                    m[:bh, bw : 2 * bw].copy(),
                    m[bh : 2 * bh, :bw].copy(),
                    m[bh : 2 * bh, bw : 2 * bw].copy(),
                )
            )
        return cls(m[: h >> levels, : w >> levels].copy(), details)


@dataclass
class FeatureField:
    """Per-pixel feature vectors, shape ``(height, width, dim)``."""

    vectors: np.ndarray
    lowfreq_mask: np.ndarray
    levels: int

    @property
    def height(self) -> int:
        return self.vectors.shape[0]

    @property
    def width(self) -> int:
        return self.vectors.shape[1]

    @property
    def dim(self) -> int:
        return self.vectors.shape[2]

    @property
    def flat(self) -> np.ndarray:
        return self.vectors.reshape(-1, self.dim)


@dataclass(frozen=True)
class WeightingConfig:
    w: float = 1.0
    mode: str = "power"  # "power" (signed power) or "scale"

    def __post_init__(self):
        if not self.w > 0:
            raise ConfigError(f"weighting parameter must be positive, got {self.w}")
        if self.mode not in ("power", "scale"):
            raise ConfigError(f"unknown weighting mode {self.mode!r}")


def feature_dim(levels: int) -> int:
    """1 + 3 * sum_k 4^(K-k); 64 for three levels."""
    return 1 + 3 * sum(4 ** (levels - k) for k in range(1, levels + 1))


def _check_divisible(shape, levels):
    step = 1 << levels
    if shape[0] % step or shape[1] % step:
        raise DimensionError(
            f"image {shape[0]}x{shape[1]} is not divisible by 2^{levels} = {step}"
        )


def dwt2_single_level(img, pair: FilterPair):
    """One analysis step: rows first, then columns. Returns ``(LL, HL, LH, HH)``."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] % 2 or img.shape[1] % 2:
        raise DimensionError(f"dwt2 needs an even-sided 2-D image, got shape {img.shape}")
    lo, hi = analysis_1d(img, pair, axis=1)
    ll, lh = analysis_1d(lo, pair, axis=0)
    hl, hh = analysis_1d(hi, pair, axis=0)
    return ll, hl, lh, hh


def idwt2_single_level(ll, hl, lh, hh, pair: FilterPair):
    shapes = {b.shape for b in (ll, hl, lh, hh)}
    if len(shapes) != 1:
        raise DimensionError(f"sub-band shapes disagree: {sorted(shapes)}")
    lo = synthesis_1d(ll, lh, pair, axis=0)
    hi = synthesis_1d(hl, hh, pair, axis=0)
    return synthesis_1d(lo, hi, pair, axis=1)


def wavedec2(img, pair: FilterPair, levels: int = 3) -> WaveletPyramid:
    img = np.asarray(img, dtype=np.float64)
    if levels < 1:
        raise ConfigError("wavedec2 needs at least one level")
    _check_divisible(img.shape, levels)
    details = []
    ll = img
    for _ in range(levels):
        ll, hl, lh, hh = dwt2_single_level(ll, pair)
        details.append((hl, lh, hh))
    return WaveletPyramid(ll, details)


def waverec2(pyr: WaveletPyramid, pair: FilterPair) -> np.ndarray:
    ll = pyr.approx
    for k in range(pyr.levels, 0, -1):
        hl, lh, hh = pyr.details[k - 1]
        if ll.shape != hl.shape:
            raise DimensionError(
                f"level {k}: approximation {ll.shape} does not match details {hl.shape}"
            )
        ll = idwt2_single_level(ll, hl, lh, hh, pair)
    return ll


def extract_first_tree(pyr: WaveletPyramid) -> np.ndarray:
    """Spatial-orientation tree rooted at (0, 0), coarsest level first."""
    K = pyr.levels
    parts = [pyr.approx[0, 0]]
    parts += [band[0, 0] for band in pyr.details[K - 1]]
    out = [np.asarray(parts, dtype=np.float64)]
    for k in range(K - 1, 0, -1):
        b = 1 << (K - k)
        for band in pyr.details[k - 1]:
            out.append(band[:b, :b].ravel())
    return np.concatenate(out)


def lowfreq_mask(levels: int) -> np.ndarray:
    mask = np.zeros(feature_dim(levels), dtype=bool)
    mask[: 4 if levels else 1] = True
    return mask


def _tree_slots(levels):
    """(level, band, dr, dc) for every component after the first four."""
    slots = []
    for k in range(levels - 1, 0, -1):
        b = 1 << (levels - k)
        for band in range(3):
            for a in range(b):
                for c in range(b):
                    slots.append((k, band, a << k, c << k))
    return slots


def undecimated_bands(img, pair: FilterPair, levels: int):
    """A-trous cascade. Returns ``(LL_K, [(HL_k, LH_k, HH_k) for k=1..K])`` at full size.

    ``band_k[p]`` equals the level-k coefficient at index 0 of the decimated
    transform of the image circularly shifted so that ``p`` lands on the origin.
    """
    u = np.asarray(img, dtype=np.float64)
    sa = pair.analysis_offset
    details = []
    for k in range(1, levels + 1):
        d = 1 << (k - 1)
        lo = periodic_filter(u, pair.h0, sa, axis=1, dilation=d)
        hi = periodic_filter(u, pair.h1, sa, axis=1, dilation=d)
        u = periodic_filter(lo, pair.h0, sa, axis=0, dilation=d)
        lh = periodic_filter(lo, pair.h1, sa, axis=0, dilation=d)
        hl = periodic_filter(hi, pair.h0, sa, axis=0, dilation=d)
        hh = periodic_filter(hi, pair.h1, sa, axis=0, dilation=d)
        details.append((hl, lh, hh))
    return u, details


def feature_field(img, pair: FilterPair, levels: int = 3, threads: int = 1) -> FeatureField:
    """Per-pixel wavelet-tree features via the undecimated transform.

    ``levels == 0`` gives the identity feature (the intensity itself, D = 1).
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise DimensionError(f"expected a 2-D image, got shape {img.shape}")
    if levels < 0:
        raise ConfigError("levels must be non-negative")
    if levels == 0:
        return FeatureField(img[:, :, None].copy(), lowfreq_mask(0), 0)
    _check_divisible(img.shape, levels)
    ll, details = undecimated_bands(img, pair, levels)
    h, w = img.shape
    vec = np.empty((h, w, feature_dim(levels)))
    vec[:, :, 0] = ll
    for j, band in enumerate(details[levels - 1]):
        vec[:, :, 1 + j] = band
    slots = _tree_slots(levels)

    def fill(i):
        k, band, dr, dc = slots[i]
        vec[:, :, 4 + i] = np.roll(details[k - 1][band], (-dr, -dc), axis=(0, 1))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(fill, range(len(slots))))
    else:
        for i in range(len(slots)):
            fill(i)
    return FeatureField(vec, lowfreq_mask(levels), levels)


def feature_field_reference(img, pair: FilterPair, levels: int = 3) -> FeatureField:
    """Literal construction: shift every pixel to the origin and transform again."""
    img = np.asarray(img, dtype=np.float64)
    if levels == 0:
        return FeatureField(img[:, :, None].copy(), lowfreq_mask(0), 0)
    _check_divisible(img.shape, levels)
    h, w = img.shape
    vec = np.empty((h, w, feature_dim(levels)))
    for r in range(h):
        for c in range(w):
            shifted = np.roll(img, (-r, -c), axis=(0, 1))
            vec[r, c] = extract_first_tree(wavedec2(shifted, pair, levels))
    return FeatureField(vec, lowfreq_mask(levels), levels)


def apply_weighting(ff: FeatureField, cfg: WeightingConfig) -> FeatureField:
    """Reweight the low-frequency components: ``sign(x)|x|^w`` or ``w*x``."""
    if cfg.w == 1.0:
        return replace(ff, vectors=ff.vectors.copy())
    vec = ff.vectors.copy()
    low = vec[:, :, ff.lowfreq_mask]
    if cfg.mode == "power":
        low = np.sign(low) * np.abs(low) ** cfg.w
    else:
        low = cfg.w * low
    vec[:, :, ff.lowfreq_mask] = low
    return replace(ff, vectors=vec)


# ---------------------------------------------------------------------------
# flat binary container: magic, height, width, levels, dim (uint32 LE), f64 LE

FEATURE_MAGIC = b"WSEGFEAT"
PYRAMID_MAGIC = b"WSEGPYR1"
LEVELSET_MAGIC = b"WSEGPHI1"
_HEADER = struct.Struct("<8s4I")


def encode_container(magic: bytes, array, levels: int) -> bytes:
    a = np.ascontiguousarray(array, dtype="<f8")
    h, w = a.shape[:2]
    dim = a.shape[2] if a.ndim == 3 else 1
    return _HEADER.pack(magic, h, w, levels, dim) + a.tobytes()


def _write(path, magic, array, levels):
    Path(path).write_bytes(encode_container(magic, array, levels))


def _read(path, magic):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError("truncated container header", len(raw))
    got, h, w, levels, dim = _HEADER.unpack_from(raw)
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}", 0)
    n = h * w * dim
    if len(raw) != _HEADER.size + 8 * n:
        raise FormatError(f"expected {n} float64 values", len(raw))
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    return data.reshape(h, w, dim), levels


def save_feature_field(ff: FeatureField, path):
    _write(path, FEATURE_MAGIC, ff.vectors, ff.levels)


def load_feature_field(path) -> FeatureField:
    vec, levels = _read(path, FEATURE_MAGIC)
    if vec.shape[2] != feature_dim(levels):
        raise FormatError(f"dim {vec.shape[2]} inconsistent with {levels} levels", 20)
    return FeatureField(vec, lowfreq_mask(levels), levels)


def save_pyramid(pyr: WaveletPyramid, path):
    _write(path, PYRAMID_MAGIC, pyr.mosaic(), pyr.levels)


def load_pyramid(path) -> WaveletPyramid:
    m, levels = _read(path, PYRAMID_MAGIC)
    return WaveletPyramid.from_mosaic(m[:, :, 0], levels)


def save_levelset(phi, path):
    _write(path, LEVELSET_MAGIC, np.asarray(phi, dtype=np.float64), 0)


def load_levelset(path) -> np.ndarray:
    a, _ = _read(path, LEVELSET_MAGIC)
    return a[:, :, 0]
