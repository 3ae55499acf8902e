"""Reduced mappings, the pre-orders they induce and rank look-up tables.

Colors are float arrays whose last axis holds the channels, normalized to
``[0, 1]``. A reduced mapping turns a color into a real score; comparing
scores gives a pre-order on colors. A :class:`RankLut` completes that
pre-order into a total order on the finite color set of one image, which is
what the morphological operators work on.
"""
from __future__ import annotations

import csv
import io
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimensionError, LutLookupError

__all__ = [
    "LEX_WEIGHTS",
    "ReducedMapping",
    "LinearMapping",
    "LexMapping",
    "TableMapping",
    "lex_mappings",
    "eval_lex_mapping",
    "induced_compare",
    "as_image",
    "unique_colors",
    "RankLut",
    "build_rank_lut",
    "rank_encode",
    "rank_decode",
]

# positional weights giving the R-G-B, G-B-R and B-R-G lexicographic orders
LEX_WEIGHTS = {
    "lex-rgb": (255.0, 1.0, 1.0 / 255.0),
    "lex-gbr": (1.0 / 255.0, 255.0, 1.0),
    "lex-brg": (1.0, 1.0 / 255.0, 255.0),
}


class ReducedMapping:
    """Scalar score function on colors.

    Subclasses implement :meth:`scores`, which maps an array of shape
    ``(..., d)`` to an array of shape ``(...)``. Calling the mapping is an
    alias for :meth:`scores`.
    """

    name = "mapping"
    dim: int | None = 3

    def scores(self, colors: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, colors) -> np.ndarray:
        colors = np.asarray(colors, dtype=np.float64)
        if self.dim is not None and colors.shape[-1:] != (self.dim,):
            raise DimensionError(
                f"{self.name} expects {self.dim} channels, got shape {colors.shape}"
            )
        return self.scores(colors)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class LinearMapping(ReducedMapping):
    """``h(x) = w . x`` for a fixed weight vector."""

    def __init__(self, weights: Sequence[float], name: str | None = None):
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.ndim != 1:
            raise DimensionError("weights must be a 1-D vector")
        self.dim = self.weights.size
        self.name = name or "custom(" + ",".join(f"{w:g}" for w in self.weights) + ")"

    def scores(self, colors):
        return colors @ self.weights


class LexMapping(LinearMapping):
    """One of the three positional lexicographic RGB mappings."""

    def __init__(self, kind: str):
        kind = kind.lower()
        if kind not in LEX_WEIGHTS:
            raise ValueError(f"unknown lexicographic mapping {kind!r}")
        super().__init__(LEX_WEIGHTS[kind], name=kind)
        self.kind = kind


class TableMapping(ReducedMapping):
    """Scores given explicitly for a finite list of colors.

    Colors outside the table raise :class:`LutLookupError`.
    """

    def __init__(self, values, scores, name: str = "table"):
        values = np.asarray(values, dtype=np.float64)
        scores = np.asarray(scores, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != scores.shape[0]:
            raise DimensionError("values must be (n, d) with one score per row")
        self.values = values
        self.table_scores = scores
        self.dim = values.shape[1]
        self.name = name
        self._index = {tuple(v): s for v, s in zip(values.tolist(), scores.tolist())}

    def scores(self, colors):
        flat = colors.reshape(-1, colors.shape[-1])
        uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
        try:
            vals = np.array([self._index[tuple(c)] for c in uniq.tolist()])
        except KeyError as exc:
            raise LutLookupError(f"color {exc.args[0]} is not in {self.name}") from None
        return vals[inverse.ravel()].reshape(colors.shape[:-1])


def lex_mappings() -> list[LexMapping]:
    """The family ``[lex-rgb, lex-gbr, lex-brg]``."""
    return [LexMapping(k) for k in LEX_WEIGHTS]


def eval_lex_mapping(kind: str, x) -> float:
    """Score of a single color under a lexicographic mapping."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (3,):
        raise DimensionError(f"expected a 3-channel color, got shape {x.shape}")
    return float(LexMapping(kind)(x))


def induced_compare(h: Callable, x, y) -> int:
    """Compare two colors under the pre-order induced by ``h``.

    Returns -1, 0 or 1. Zero means a tie in the pre-order, which does not
    imply ``x == y``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"cannot compare shapes {x.shape} and {y.shape}")
    hx, hy = (float(v) for v in h(np.stack([x, y])))
    return (hx > hy) - (hx < hy)


def as_image(image) -> np.ndarray:
    """Validate and return an image as a float64 ``(H, W, d)`` array."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[0] < 1 or img.shape[1] < 1 or img.shape[2] < 1:
        raise DimensionError(f"expected a non-empty (H, W, d) image, got {img.shape}")
    if not np.all((img >= 0.0) & (img <= 1.0)):
        raise ValueError("image channels must lie in [0, 1]")
    return img


def unique_colors(image) -> np.ndarray:
    img = np.asarray(image, dtype=np.float64)
    return np.unique(img.reshape(-1, img.shape[-1]), axis=0)


class RankLut:
    """Bijection between a finite color set and ranks ``0 .. u-1``.

    ``colors[k]`` is the color of rank ``k``; ``scores[k]`` its score under
    the mapping the table was built from.
    """

    def __init__(self, colors: np.ndarray, scores: np.ndarray):
        self.colors = np.asarray(colors, dtype=np.float64)
        self.scores = np.asarray(scores, dtype=np.float64)
        self.colors.setflags(write=False)
        self.scores.setflags(write=False)
        self._rank_of = {tuple(c): k for k, c in enumerate(self.colors.tolist())}

    def __len__(self):
        return len(self.colors)

    @property
    def dim(self) -> int:
        return self.colors.shape[1]

    def rank_of(self, color) -> int:
        try:
            return self._rank_of[tuple(np.asarray(color, dtype=np.float64).tolist())]
        except KeyError:
            raise LutLookupError(f"color {color!r} is not in the look-up table") from None

    def encode(self, image) -> np.ndarray:
        img = np.asarray(image, dtype=np.float64)
        if img.shape[-1] != self.dim:
            raise DimensionError(f"image has {img.shape[-1]} channels, table has {self.dim}")
        flat = img.reshape(-1, self.dim)
        uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
        ranks = np.empty(len(uniq), dtype=np.int64)
        for k, c in enumerate(uniq.tolist()):
            r = self._rank_of.get(tuple(c))
            if r is None:
                raise LutLookupError(f"color {tuple(c)} is not in the look-up table")
            ranks[k] = r
        return ranks[inverse.ravel()].reshape(img.shape[:-1])

    def decode(self, ranks) -> np.ndarray:
        ranks = np.asarray(ranks)
        if not np.issubdtype(ranks.dtype, np.integer):
            raise LutLookupError("rank images must be integer valued")
        if ranks.size and (ranks.min() < 0 or ranks.max() >= len(self)):
            bad = ranks[(ranks < 0) | (ranks >= len(self))].flat[0]
            raise LutLookupError(f"rank {int(bad)} is outside 0..{len(self) - 1}")
        return self.colors[ranks]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = ["r", "g", "b"] if self.dim == 3 else [f"c{i}" for i in range(self.dim)]
        writer.writerow(["rank", *names, "score"])
        for k, (c, s) in enumerate(zip(self.colors.tolist(), self.scores.tolist())):
            writer.writerow([k, *(repr(v) for v in c), repr(s)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RankLut":
        rows = list(csv.reader(io.StringIO(text)))
        body = rows[1:]
        ranks = [int(r[0]) for r in body]
        if ranks != list(range(len(body))):
            raise LutLookupError("ranks in the CSV are not 0..u-1 in ascending order")
        colors = np.array([[float(v) for v in r[1:-1]] for r in body])
        scores = np.array([float(r[-1]) for r in body])
        return cls(colors, scores)


def build_rank_lut(h: Callable, image) -> RankLut:
    """Sort the unique colors of ``image`` by ``h``-score.

    Equal scores are ordered lexicographically by channel values, channel 0
    first, so the table is deterministic even when ``h`` is not injective.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.size == 0:
        raise DimensionError("cannot build a look-up table for an empty image")
    colors = unique_colors(img)
    scores = np.asarray(h(colors), dtype=np.float64).reshape(len(colors))
    if np.isnan(scores).any():
        raise ValueError("reduced mapping produced NaN scores")
    keys = tuple(colors[:, c] for c in reversed(range(colors.shape[1]))) + (scores,)
    order = np.lexsort(keys)
    return RankLut(colors[order], scores[order])


def rank_encode(image, lut: RankLut) -> np.ndarray:
    return lut.encode(image)


def rank_decode(ranks, lut: RankLut) -> np.ndarray:
    return lut.decode(ranks)


def sort_colors(h: Callable, colors: Iterable) -> np.ndarray:
    """Colors sorted ascending by ``h`` with the look-up table tie-break."""
    colors = np.asarray(list(colors), dtype=np.float64)
    return build_rank_lut(h, colors[None, :, :]).colors
