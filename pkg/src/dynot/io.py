"""
Image and tensor files.

Tensor files (``.dten``) hold one float64 array::

    b"DOTTENS1" | ndims: u32 LE | dims: ndims x u64 LE | data: f64 LE

with axis 0 varying fastest, the same linearization the grid operators use.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import BadMagic, IoError, SizeMismatch, UnsupportedFormat

MAGIC = b"DOTTENS1"
IMAGE_FORMATS = {".png": "PNG", ".ppm": "PPM"}


def save_tensor(tensor, path) -> None:
    arr = np.asarray(tensor, dtype="<f8")
    header = MAGIC + struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}Q", *arr.shape)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(arr.ravel(order="F").tobytes())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_tensor(path) -> np.ndarray:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if raw[:8] != MAGIC:
        raise BadMagic(f"{path}: not a tensor file")
    if len(raw) < 12:
        raise SizeMismatch(f"{path}: truncated header")
    (ndims,) = struct.unpack_from("<I", raw, 8)
    offset = 12 + 8 * ndims
    if len(raw) < offset:
        raise SizeMismatch(f"{path}: truncated header")
    dims = struct.unpack_from(f"<{ndims}Q", raw, 12)
    count = int(np.prod(dims, dtype=np.int64))
    if len(raw) != offset + 8 * count:
        raise SizeMismatch(f"{path}: expected {count} values for dims {dims}, "
                           f"file holds {(len(raw) - offset) / 8:g}")
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    return data.reshape(dims, order="F").astype(float)


def _image_format(path) -> str:
    fmt = IMAGE_FORMATS.get(Path(path).suffix.lower())
    if fmt is None:
        raise UnsupportedFormat(f"{path}: only .png and .ppm images are supported")
    return fmt


def load_image(path) -> np.ndarray:
    """Read an 8-bit PNG or binary PPM as an ``(height, width, 3)`` array in [0, 1]."""
    _image_format(path)
    try:
        with Image.open(path) as img:
            img.load()
            rgb = img.convert("RGB")
    except FileNotFoundError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise IoError(f"cannot decode {path}: {exc}") from exc
    return np.asarray(rgb, dtype=float) / 255.0


def save_image(img, path) -> None:
    fmt = _image_format(path)
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise UnsupportedFormat(f"image must be (height, width, 3), got {arr.shape}")
    data = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    try:
        Image.fromarray(data, "RGB").save(path, format=fmt)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
