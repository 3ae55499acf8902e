"""Flat erosion, dilation, opening and closing of vector-valued images.

Every operator encodes the image into LUT ranks, runs the scalar min/max
filter on the rank image and decodes the result, so output colors are always
taken from the input image. Samples falling outside the image domain are
skipped instead of padded.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import ConfigError, DimensionError
from .ordering import RankLut, as_image, build_rank_lut

__all__ = [
    "StructuringElement",
    "erode_ranks",
    "dilate_ranks",
    "erode",
    "dilate",
    "opening",
    "closing",
    "apply_operator",
    "OPERATORS",
]


@dataclass(frozen=True)
class StructuringElement:
    """Finite set of integer ``(dy, dx)`` offsets."""

    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        offs = tuple(sorted({(int(dy), int(dx)) for dy, dx in self.offsets}))
        if not offs:
            raise ConfigError("structuring element must be non-empty")
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def from_offsets(cls, offsets: Iterable[tuple[int, int]]) -> "StructuringElement":
        return cls(tuple(offsets))

    @classmethod
    def square(cls, side: int) -> "StructuringElement":
        if side < 1 or side % 2 == 0:
            raise ConfigError(f"square side must be a positive odd integer, got {side}")
        r = side // 2
        return cls(tuple((dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)))

    @classmethod
    def disk(cls, radius: int) -> "StructuringElement":
        if radius < 0:
            raise ConfigError(f"disk radius must be >= 0, got {radius}")
        r = int(radius)
        return cls(
            tuple(
                (dy, dx)
                for dy in range(-r, r + 1)
                for dx in range(-r, r + 1)
                if dy * dy + dx * dx <= r * r
            )
        )

    @classmethod
    def cross(cls, arm: int) -> "StructuringElement":
        if arm < 0:
            raise ConfigError(f"cross arm must be >= 0, got {arm}")
        offs = {(0, 0)}
        for k in range(1, arm + 1):
            offs |= {(k, 0), (-k, 0), (0, k), (0, -k)}
        return cls(tuple(offs))

    @classmethod
    def parse(cls, text: str) -> "StructuringElement":
        """Parse ``square:N``, ``disk:R`` or ``cross:A``."""
        kind, _, arg = text.partition(":")
        constructors = {"square": cls.square, "disk": cls.disk, "cross": cls.cross}
        if kind not in constructors or not arg.lstrip("-").isdigit():
            raise ConfigError(f"bad structuring element {text!r}; use square:N, disk:R or cross:A")
        return constructors[kind](int(arg))

    def reflect(self) -> "StructuringElement":
        return StructuringElement(tuple((-dy, -dx) for dy, dx in self.offsets))

    @property
    def radius(self) -> int:
        return max(max(abs(dy), abs(dx)) for dy, dx in self.offsets)

    def __len__(self):
        return len(self.offsets)

    def __contains__(self, item):
        return tuple(item) in self.offsets


def _rank_filter(ranks: np.ndarray, offsets, reduce, fill) -> np.ndarray:
    # out[p] = reduce over offsets o of ranks[p + o], skipping samples outside D
    ranks = np.asarray(ranks)
    if ranks.ndim != 2:
        raise DimensionError(f"rank image must be 2-D, got shape {ranks.shape}")
    height, width = ranks.shape
    r = max(max(abs(dy), abs(dx)) for dy, dx in offsets)
    padded = np.full((height + 2 * r, width + 2 * r), fill, dtype=np.int64)
    padded[r : r + height, r : r + width] = ranks
    out = np.full((height, width), fill, dtype=np.int64)
    for dy, dx in offsets:
        reduce(out, padded[r + dy : r + dy + height, r + dx : r + dx + width], out=out)
    if np.any(out == fill):
        raise ConfigError("structuring element leaves some pixels with no samples inside the image")
    return out


def erode_ranks(ranks, se: StructuringElement) -> np.ndarray:
    """Minimum of ``ranks[p + s]`` over ``s`` in ``se`` with ``p + s`` in the domain."""
    ranks = np.asarray(ranks, dtype=np.int64)
    return _rank_filter(ranks, se.offsets, np.minimum, np.iinfo(np.int64).max)


def dilate_ranks(ranks, se: StructuringElement) -> np.ndarray:
    """Maximum of ``ranks[p - s]`` over ``s`` in ``se`` with ``p - s`` in the domain."""
    ranks = np.asarray(ranks, dtype=np.int64)
    return _rank_filter(ranks, se.reflect().offsets, np.maximum, -1)


def _prepare(image, h, lut):
    img = as_image(image)
    if lut is None:
        lut = build_rank_lut(h, img)
    return lut, lut.encode(img)


def erode(image, h: Callable, se: StructuringElement, lut: RankLut | None = None) -> np.ndarray:
    lut, ranks = _prepare(image, h, lut)
    return lut.decode(erode_ranks(ranks, se))


def dilate(image, h: Callable, se: StructuringElement, lut: RankLut | None = None) -> np.ndarray:
    lut, ranks = _prepare(image, h, lut)
    return lut.decode(dilate_ranks(ranks, se))


def opening(image, h: Callable, se: StructuringElement, lut: RankLut | None = None) -> np.ndarray:
    """Dilation of the erosion; both stages share the table of ``image``."""
    lut, ranks = _prepare(image, h, lut)
    return lut.decode(dilate_ranks(erode_ranks(ranks, se), se))


def closing(image, h: Callable, se: StructuringElement, lut: RankLut | None = None) -> np.ndarray:
    """Erosion of the dilation; both stages share the table of ``image``."""
    lut, ranks = _prepare(image, h, lut)
    return lut.decode(erode_ranks(dilate_ranks(ranks, se), se))


OPERATORS = {"erode": erode, "dilate": dilate, "open": opening, "close": closing}


def apply_operator(name: str, image, h, se, lut=None) -> np.ndarray:
    try:
        op = OPERATORS[name]
    except KeyError:
        raise ConfigError(f"unknown operator {name!r}; choose from {sorted(OPERATORS)}") from None
    return op(image, h, se, lut=lut)
