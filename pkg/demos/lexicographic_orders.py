"""
Reduced orderings and the rank look-up table
=============================================

A reduced ordering scores each color with a scalar and compares scores.
The positional lexicographic mappings put most of the weight on one channel,
so two distinct 8-bit colors never share a score.
"""

import numpy as np

from condorcet_morph import LexMapping, build_rank_lut, lex_mappings
from condorcet_morph.experiment import palette_colors, rank_colors

# score a few colors with each mapping
colors = np.array([[255, 0, 0], [0, 255, 0], [0, 0, 255], [128, 128, 128]]) / 255.0
for h in lex_mappings():
    print(h.name, np.round(h(colors), 4))

# the look-up table sorts the distinct colors of an image; ranks replace colors
rng = np.random.default_rng(0)
image = colors[rng.integers(0, len(colors), size=(4, 6))]
lut = build_rank_lut(LexMapping("lex-gbr"), image)
print(lut.to_csv())
ranks = lut.encode(image)
print(ranks)
assert np.array_equal(lut.decode(ranks), image)

# the 16-color palette under each mapping, least to greatest
names, palette = palette_colors()
index = {tuple(c): n for n, c in zip(names, palette.tolist())}
for h in lex_mappings():
    print(f"{h.name:8s}", " ".join(index[tuple(c)] for c in rank_colors(h, palette).tolist()))
