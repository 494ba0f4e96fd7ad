"""Grayscale image input/output: PGM (P2/P5) by hand, PNG through Pillow.

Images are returned as float64 arrays in [0, 1], divided by the format's
maximum value. Label maps are written as 8-bit (or 16-bit for more than 128
classes) binary PGM with evenly spaced gray levels.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import DimensionError, FormatError, IoError

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_WHITESPACE = b" \t\r\n\v\f"


class _Tokens:
    """Header tokenizer that skips ``#`` comments and tracks byte offsets."""

    def __init__(self, raw: bytes, pos: int = 2):
        self.raw = raw
        self.pos = pos
        self.start = pos  # offset of the most recent token

    def _skip(self):
        raw, n = self.raw, len(self.raw)
        while self.pos < n:
            c = raw[self.pos : self.pos + 1]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == b"#":
                while self.pos < n and raw[self.pos : self.pos + 1] not in b"\r\n":
                    self.pos += 1
            else:
                break

    def integer(self, what: str) -> int:
        self._skip()
        start = self.start = self.pos
        while self.pos < len(self.raw) and self.raw[self.pos : self.pos + 1].isdigit():
            self.pos += 1
        if self.pos == start:
            if start >= len(self.raw):
                raise FormatError(f"unexpected end of file reading {what}", start)
            raise FormatError(f"expected an unsigned integer for {what}", start)
        return int(self.raw[start : self.pos])


def parse_pgm(raw: bytes) -> tuple[np.ndarray, int]:
    """Decode P2/P5 bytes into ``(integer array, maxval)``."""
    if len(raw) < 2:
        raise FormatError("file too short for a PGM magic number", len(raw))
    magic = raw[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"unsupported magic {magic!r}; expected P2 or P5", 0)
    tok = _Tokens(raw)
    width = tok.integer("width")
    height = tok.integer("height")
    if width < 1 or height < 1:
        raise FormatError("image dimensions must be positive", tok.start)
    maxval = tok.integer("maxval")
    if not 0 < maxval < 65536:
        raise FormatError(f"maxval {maxval} outside 1..65535", tok.start)
    n = width * height

    if magic == b"P5":
        if tok.pos >= len(raw) or raw[tok.pos : tok.pos + 1] not in _WHITESPACE:
            raise FormatError("missing whitespace after maxval", tok.pos)
        start = tok.pos + 1
        dtype = ">u1" if maxval < 256 else ">u2"
        nbytes = n * np.dtype(dtype).itemsize
        if len(raw) - start < nbytes:
            raise FormatError(
                f"truncated raster: need {nbytes} bytes, have {len(raw) - start}", len(raw)
            )
        data = np.frombuffer(raw, dtype=dtype, count=n, offset=start).astype(np.int64)
        if data.max(initial=0) > maxval:
            bad = int(np.argmax(data > maxval))
            raise FormatError("sample exceeds maxval", start + bad * np.dtype(dtype).itemsize)
    else:
        data = np.empty(n, dtype=np.int64)
        for i in range(n):
            v = tok.integer(f"sample {i}")
            if v > maxval:
                raise FormatError("sample exceeds maxval", tok.start)
            data[i] = v
    return data.reshape(height, width), maxval


def _png_header(raw: bytes):
    # IHDR: length(4) type(4) width(4) height(4) depth(1) colour type(1)
    if len(raw) < 33 or raw[12:16] != b"IHDR":
        raise FormatError("truncated or malformed PNG header", min(len(raw), 12))
    return raw[24], raw[25]


def _read_png(path: Path, raw: bytes) -> np.ndarray:
    depth, colour = _png_header(raw)
    if colour != 0:
        raise FormatError(f"PNG colour type {colour} is not grayscale", 25)
    if depth not in (8, 16):
        raise FormatError(f"PNG bit depth {depth} unsupported (need 8 or 16)", 24)
    from PIL import Image

    try:
        with Image.open(path) as im:
            im.load()
            a = np.array(im)
    except (OSError, SyntaxError, ValueError) as exc:
        raise FormatError(f"cannot decode PNG: {exc}", 8) from exc
    return a.astype(np.float64) / (255.0 if depth == 8 else 65535.0)


def read_image(path) -> np.ndarray:
    """Read a PGM or grayscale PNG into a float array normalised to [0, 1]."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if raw.startswith(PNG_SIGNATURE):
        return _read_png(path, raw)
    data, maxval = parse_pgm(raw)
    return data.astype(np.float64) / maxval


def encode_pgm(values, maxval: int = 255, plain: bool = False) -> bytes:
    values = np.asarray(values)
    if values.ndim != 2:
        raise DimensionError(f"PGM needs a 2-D array, got shape {values.shape}")
    h, w = values.shape
    header = f"{'P2' if plain else 'P5'}\n{w} {h}\n{maxval}\n".encode("ascii")
    if plain:
        rows = [" ".join(str(int(v)) for v in row) for row in values]
        return header + ("\n".join(rows) + "\n").encode("ascii")
    dtype = ">u1" if maxval < 256 else ">u2"
    return header + np.ascontiguousarray(values, dtype=dtype).tobytes()


def _write_bytes(path, payload: bytes):
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_image(img, path, maxval: int = 255, plain: bool = False):
    """Quantise a [0, 1] image to ``maxval`` levels and write it as PGM."""
    img = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    _write_bytes(path, encode_pgm(np.rint(img * maxval), maxval, plain))


def label_levels(classes: int) -> tuple[int, np.ndarray]:
    """``(maxval, gray level per class)``; 0 and maxval for the extreme classes."""
    classes = max(int(classes), 2)
    maxval = 255 if classes <= 128 else 65535
    return maxval, np.arange(classes) * maxval // (classes - 1)


def encode_mask(labels, classes: int | None = None) -> bytes:
    labels = np.asarray(labels)
    if labels.dtype == bool:
        labels = labels.astype(np.int64)
    if labels.size and labels.min() < 0:
        raise DimensionError("labels must be non-negative")
    if classes is None:
        classes = int(labels.max(initial=0)) + 1
    if labels.size and labels.max() >= max(classes, 2):
        raise DimensionError(f"label {int(labels.max())} out of range for {classes} classes")
    maxval, levels = label_levels(classes)
    return encode_pgm(levels[labels], maxval)


def write_mask(labels, path, classes: int | None = None):
    """Write a mask or labeling as PGM; class k maps to ``k * maxval // (C - 1)``."""
    _write_bytes(path, encode_mask(labels, classes))


def read_labels(path, classes: int) -> np.ndarray:
    """Inverse of :func:`write_mask`: nearest class for each gray level."""
    img = read_image(path)
    return np.rint(img * (max(classes, 2) - 1)).astype(np.int64)


def band_visualization(band) -> np.ndarray:
    """Min-max stretch of a coefficient band to [0, 1]; constant bands map to 0."""
    band = np.asarray(band, dtype=np.float64)
    lo, hi = float(band.min()), float(band.max())
    if hi <= lo:
        return np.zeros_like(band)
    return (band - lo) / (hi - lo)


def remove_quietly(paths):
    for p in paths:
        try:
            os.remove(p)
        except OSError:
            pass
