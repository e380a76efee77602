"""Raster images in linear double-precision intensity, plus file codecs.

Processing is linear throughout: 8-bit samples map to value/maxval on
read and are clamped to [0, 1] and rounded back on write, with no gamma
handling. PGM (P2 and P5) is parsed and written natively since it is
the interchange format for kernel images; PNG and JPEG go through
Pillow.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class GeometryMismatchError(ValueError):
    """Images that must share width/height/channels do not."""


@dataclass(frozen=True)
class RasterImage:
    """Width x height x channels intensity image, nominally in [0, 1].

    Samples may exceed the nominal range transiently (noise, gain
    restore); they are only clamped when written to a file. The pixel
    array is copied in and frozen, so instances are safe to share.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim == 2:
            px = px[:, :, np.newaxis]
        if px.ndim != 3 or px.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W) or (H, W, 1|3), got {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("image contains non-finite samples")
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def same_geometry(self, other: "RasterImage") -> bool:
        return self.pixels.shape == other.pixels.shape


def _require_same_geometry(a: RasterImage, b: RasterImage):
    if not a.same_geometry(b):
        raise GeometryMismatchError(
            f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}"
        )


# ---------------------------------------------------------------------------
# PGM

def encode_pgm(samples: np.ndarray, maxval: int = 255, binary: bool = True) -> bytes:
    """Serialize a 2-D integer-valued array as P5 (binary) or P2 (ASCII)."""
    arr = np.asarray(samples)
    if arr.ndim != 2:
        raise ValueError("PGM holds a single 2-D plane")
    if not 1 <= maxval <= 255:
        raise ValueError("maxval must be in [1, 255]")
    data = np.clip(np.rint(arr), 0, maxval).astype(np.uint8)
    h, w = data.shape
    if binary:
        return f"P5\n{w} {h}\n{maxval}\n".encode() + data.tobytes()
    rows = "\n".join(" ".join(str(v) for v in row) for row in data)
    return f"P2\n{w} {h}\n{maxval}\n{rows}\n".encode()


def _pgm_header_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments."""
    pos = 0
    while True:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        yield data[start:pos].decode("ascii"), pos


def decode_pgm(data: bytes) -> np.ndarray:
    """Parse P2/P5 bytes into a (H, W) float array scaled to [0, 1]."""
    tokens = _pgm_header_tokens(data)
    magic, _ = next(tokens)
    if magic not in ("P2", "P5"):
        raise ValueError(f"not a PGM file (magic {magic!r})")
    (w, _), (h, _), (maxval, end) = (next(tokens) for _ in range(3))
    w, h, maxval = int(w), int(h), int(maxval)
    if w < 1 or h < 1 or not 1 <= maxval <= 65535:
        raise ValueError("bad PGM dimensions")
    if magic == "P5":
        # exactly one whitespace byte separates the header from raster data
        raw = data[end + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        count = w * h
        arr = np.frombuffer(raw[:count * dtype.itemsize], dtype=dtype)
        if arr.size != count:
            raise ValueError("truncated PGM raster")
        arr = arr.reshape(h, w)
    else:
        values = data[end:].split()
        if len(values) != w * h:
            raise ValueError("P2 sample count mismatch")
        arr = np.array([int(v) for v in values], dtype=np.float64).reshape(h, w)
    return arr.astype(np.float64) / maxval


def read_pgm(path) -> np.ndarray:
    return decode_pgm(Path(path).read_bytes())


def write_pgm(path, samples: np.ndarray, maxval: int = 255, binary: bool = True):
    Path(path).write_bytes(encode_pgm(samples, maxval, binary))


# ---------------------------------------------------------------------------
# Generic image files

def _to_uint8(img: RasterImage) -> np.ndarray:
    return np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)


def read_image(path) -> RasterImage:
    """Load PGM/PNG/JPEG into linear [0, 1] doubles (value/255 for 8-bit)."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] in (b"P2", b"P5"):
        return RasterImage(decode_pgm(data))
    from PIL import Image

    with Image.open(io.BytesIO(data)) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB" if ("A" in im.mode or len(im.mode) > 2) else "L")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    return RasterImage(arr)


def write_image(path, img: RasterImage):
    """Write 8-bit PGM or PNG, clamping samples to [0, 1] first."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        if img.channels != 1:
            raise ValueError("PGM output requires a single-channel image")
        write_pgm(path, _to_uint8(img)[:, :, 0])
        return
    if suffix != ".png":
        raise ValueError(f"unsupported output format {suffix!r}")
    from PIL import Image

    data = _to_uint8(img)
    if img.channels == 1:
        Image.fromarray(data[:, :, 0], mode="L").save(path, format="PNG")
    else:
        Image.fromarray(data, mode="RGB").save(path, format="PNG")
