import functools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condorcet_morph.errors import ConfigError
from condorcet_morph.morphology import (
    StructuringElement,
    closing,
    dilate,
    dilate_ranks,
    erode,
    erode_ranks,
    opening,
)
from condorcet_morph.ordering import LexMapping, LinearMapping, build_rank_lut, lex_mappings

from conftest import random_palette_image

BLACK, WHITE = [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]


def _key(h):
    # score first, then channels: the look-up-table total order
    def cmp(x, y):
        c = (np.asarray(h(np.array([x, y])))).tolist()
        if c[0] != c[1]:
            return -1 if c[0] < c[1] else 1
        tx, ty = tuple(map(float, x)), tuple(map(float, y))
        return (tx > ty) - (tx < ty)

    return functools.cmp_to_key(cmp)


def naive_erode(img, h, se):
    out = np.empty_like(img)
    H, W, _ = img.shape
    for y in range(H):
        for x in range(W):
            vals = [tuple(img[y + dy, x + dx]) for dy, dx in se.offsets if 0 <= y + dy < H and 0 <= x + dx < W]
            out[y, x] = min(vals, key=_key(h))
    return out


def naive_dilate(img, h, se):
    out = np.empty_like(img)
    H, W, _ = img.shape
    for y in range(H):
        for x in range(W):
            vals = [tuple(img[y - dy, x - dx]) for dy, dx in se.offsets if 0 <= y - dy < H and 0 <= x - dx < W]
            out[y, x] = max(vals, key=_key(h))
    return out


def test_structuring_elements():
    sq = StructuringElement.square(3)
    assert len(sq) == 9 and (0, 0) in sq
    d2 = StructuringElement.disk(2)
    assert len(d2) == 13
    assert set(d2.offsets) == {(a, b) for a in range(-2, 3) for b in range(-2, 3) if a * a + b * b <= 4}
    assert len(StructuringElement.disk(10)) == sum(
        1 for a in range(-10, 11) for b in range(-10, 11) if a * a + b * b <= 100
    )
    assert len(StructuringElement.cross(1)) == 5
    assert StructuringElement.parse("disk:2") == d2
    for bad in ["square:2", "ring:3", "disk:x", "square"]:
        with pytest.raises(ConfigError):
            StructuringElement.parse(bad)
    with pytest.raises(ConfigError):
        StructuringElement(())


@pytest.mark.parametrize("op", [erode, dilate, opening, closing])
def test_constant_image_is_fixed(op):
    img = np.full((5, 6, 3), 0.25)
    out = op(img, LexMapping("lex-brg"), StructuringElement.disk(2))
    assert np.array_equal(out, img)


def test_black_white_line():
    img = np.array([[BLACK, WHITE, BLACK]])
    se = StructuringElement.from_offsets([(0, -1), (0, 0), (0, 1)])
    h = LexMapping("lex-rgb")
    assert np.array_equal(dilate(img, h, se), np.array([[WHITE] * 3]))
    assert np.array_equal(erode(img, h, se), np.array([[BLACK] * 3]))


def test_dilation_matches_naive_lex_gbr(rng):
    img = random_palette_image(rng, 8, 8, 3)
    h, se = LexMapping("lex-gbr"), StructuringElement.square(3)
    assert np.array_equal(dilate(img, h, se), naive_dilate(img, h, se))


def test_erosion_matches_naive_disk(rng):
    img = random_palette_image(rng, 8, 8, 5)
    h, se = LexMapping("lex-rgb"), StructuringElement.disk(2)
    assert np.array_equal(erode(img, h, se), naive_erode(img, h, se))


def test_asymmetric_se_matches_naive(rng):
    img = random_palette_image(rng, 7, 9, 6)
    se = StructuringElement.from_offsets([(0, 0), (0, 2), (1, -1), (-2, 1)])
    h = LexMapping("lex-brg")
    assert np.array_equal(erode(img, h, se), naive_erode(img, h, se))
    assert np.array_equal(dilate(img, h, se), naive_dilate(img, h, se))


def test_noninjective_mapping_uses_tie_break(rng):
    img = random_palette_image(rng, 6, 6, 6)
    h = LinearMapping([1.0, 1.0, 1.0])
    img[0, 0] = [0.2, 0.0, 0.0]
    img[0, 1] = [0.0, 0.2, 0.0]
    se = StructuringElement.square(3)
    assert np.array_equal(dilate(img, h, se), naive_dilate(img, h, se))
    assert np.array_equal(erode(img, h, se), naive_erode(img, h, se))


def test_empty_sampling_set_raises():
    se = StructuringElement.from_offsets([(0, 5)])
    with pytest.raises(ConfigError):
        erode(np.zeros((3, 3, 3)), LexMapping("lex-rgb"), se)


def test_open_close_equal_compositions(rng):
    img = random_palette_image(rng, 9, 9, 6)
    h, se = LexMapping("lex-rgb"), StructuringElement.square(3)
    lut = build_rank_lut(h, img)
    assert np.array_equal(opening(img, h, se), dilate(erode(img, h, se), h, se, lut=lut))
    assert np.array_equal(closing(img, h, se), erode(dilate(img, h, se), h, se, lut=lut))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 8), st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
def test_morphology_laws(height, width, n_colors, seed, radius):
    rng = np.random.default_rng(seed)
    img = random_palette_image(rng, height, width, n_colors)
    h = lex_mappings()[seed % 3]
    se = StructuringElement.disk(radius) if seed % 2 else StructuringElement.square(2 * radius + 1)
    lut = build_rank_lut(h, img)
    R = lut.encode(img)
    er, di = erode_ranks(R, se), dilate_ranks(R, se)
    op, cl = dilate_ranks(er, se), erode_ranks(di, se)
    assert np.all(er <= R) and np.all(R <= di)
    assert np.all(op <= R) and np.all(R <= cl)
    assert np.array_equal(dilate_ranks(erode_ranks(op, se), se), op)
    assert np.array_equal(erode_ranks(dilate_ranks(cl, se), se), cl)
    colors = {tuple(c) for c in img.reshape(-1, 3).tolist()}
    for out in (erode(img, h, se), dilate(img, h, se), opening(img, h, se), closing(img, h, se)):
        assert {tuple(c) for c in out.reshape(-1, 3).tolist()} <= colors


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_operators_are_increasing(seed):
    rng = np.random.default_rng(seed)
    R = rng.integers(0, 10, size=(7, 8))
    S = R + rng.integers(0, 3, size=R.shape)
    se = StructuringElement.square(3)
    for f in (erode_ranks, dilate_ranks):
        assert np.all(f(R, se) <= f(S, se))


def test_monotone_rescoring_leaves_outputs_unchanged(rng):
    img = random_palette_image(rng, 10, 10, 7)
    h = LexMapping("lex-gbr")

    class Cubed(LexMapping):
        def scores(self, colors):
            return np.exp(super().scores(colors) / 50.0) ** 3 - 7.0

    g = Cubed("lex-gbr")
    se = StructuringElement.disk(2)
    for op in (erode, dilate, opening, closing):
        assert np.array_equal(op(img, h, se), op(img, g, se))
