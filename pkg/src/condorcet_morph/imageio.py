"""CIFAR-10 binary batches and 8-bit RGB image files (PPM and PNG).

Images live in memory as float64 ``(H, W, 3)`` arrays with values ``k/255``.
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import DataFormatError

__all__ = [
    "CIFAR_RECORD",
    "load_cifar_batch",
    "to_uint8",
    "from_uint8",
    "read_ppm",
    "write_ppm",
    "read_png",
    "write_png",
    "read_image",
    "write_image",
]

CIFAR_SIDE = 32
CIFAR_RECORD = 1 + 3 * CIFAR_SIDE * CIFAR_SIDE


def from_uint8(arr) -> np.ndarray:
    return np.asarray(arr, dtype=np.uint8).astype(np.float64) / 255.0


def to_uint8(image) -> np.ndarray:
    img = np.asarray(image, dtype=np.float64)
    if img.size and (img.min() < 0.0 or img.max() > 1.0):
        raise DataFormatError("image values must lie in [0, 1]")
    return np.rint(img * 255.0).astype(np.uint8)


def load_cifar_batch(path, start: int = 0, stop: int | None = None) -> list[np.ndarray]:
    """Records ``start .. stop-1`` of a CIFAR-10 binary batch file.

    Each record is one label byte followed by the red, green and blue
    planes of a 32x32 image. Labels are discarded.
    """
    path = Path(path)
    size = path.stat().st_size
    if size % CIFAR_RECORD:
        whole = size // CIFAR_RECORD
        raise DataFormatError(
            f"{path}: truncated record at byte offset {whole * CIFAR_RECORD} "
            f"(file size {size} is not a multiple of {CIFAR_RECORD})"
        )
    n = size // CIFAR_RECORD
    stop = n if stop is None else stop
    if start < 0 or stop < start:
        raise ValueError(f"bad record range {start}..{stop}")
    if stop > n:
        raise DataFormatError(f"{path}: requested record {stop - 1} but the file holds {n}")
    if stop == start:
        return []
    raw = np.fromfile(path, dtype=np.uint8, count=(stop - start) * CIFAR_RECORD, offset=start * CIFAR_RECORD)
    planes = raw.reshape(stop - start, CIFAR_RECORD)[:, 1:].reshape(-1, 3, CIFAR_SIDE, CIFAR_SIDE)
    return [from_uint8(p.transpose(1, 2, 0)) for p in planes]


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def read_ppm(path) -> np.ndarray:
    """Binary P6 file with maxval 255; comments in the header are allowed."""
    data = Path(path).read_bytes()
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise DataFormatError(f"{path}: incomplete PPM header")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P6":
        raise DataFormatError(f"{path}: only binary P6 PPM is supported, got {fields[0]!r}")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise DataFormatError(f"{path}: malformed PPM header") from None
    if maxval != 255:
        raise DataFormatError(f"{path}: unsupported bit depth (maxval {maxval}); only 8-bit is supported")
    pos += 1  # single whitespace byte after maxval
    expected = width * height * 3
    body = data[pos : pos + expected]
    if len(body) != expected:
        raise DataFormatError(f"{path}: expected {expected} pixel bytes, found {len(body)}")
    return from_uint8(np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3))


def write_ppm(path, image) -> None:
    arr = to_uint8(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DataFormatError("PPM output needs an (H, W, 3) image")
    h, w, _ = arr.shape
    Path(path).write_bytes(f"P6\n{w} {h}\n255\n".encode("ascii") + arr.tobytes())


_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def read_png(path) -> np.ndarray:
    from PIL import Image

    with open(path, "rb") as fh:
        head = fh.read(33)
    if head[:8] != _PNG_SIGNATURE or head[12:16] != b"IHDR":
        raise DataFormatError(f"{path}: not a PNG file")
    # Pillow silently narrows 16-bit RGB to 8 bits, so check IHDR directly
    if head[24] != 8:
        raise DataFormatError(f"{path}: unsupported bit depth {head[24]}; only 8-bit PNG is supported")
    with Image.open(path) as im:
        if im.format != "PNG":
            raise DataFormatError(f"{path}: not a PNG file")
        if im.mode not in ("RGB", "RGBA", "L", "P", "LA"):
            raise DataFormatError(f"{path}: unsupported bit depth or mode {im.mode!r}; only 8-bit is supported")
        arr = np.asarray(im.convert("RGB"))
    return from_uint8(arr)


def write_png(path, image) -> None:
    from PIL import Image

    arr = to_uint8(image)
    Image.fromarray(arr).save(path, format="PNG")


def read_image(path) -> np.ndarray:
    suffix = Path(path).suffix.lower()
    if suffix in (".ppm", ".pnm"):
        return read_ppm(path)
    if suffix == ".png":
        return read_png(path)
    raise DataFormatError(f"{path}: unsupported image type {suffix!r} (use .ppm or .png)")


def write_image(path, image) -> None:
    suffix = Path(path).suffix.lower()
    if suffix in (".ppm", ".pnm"):
        write_ppm(path, image)
    elif suffix == ".png":
        write_png(path, image)
    else:
        raise DataFormatError(f"{path}: unsupported image type {suffix!r} (use .ppm or .png)")
