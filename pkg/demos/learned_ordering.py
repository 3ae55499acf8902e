"""
Learning a consensus ordering from image colors
================================================

A small network maps a color to a score. It is trained so that, on pairs of
pixel colors, its order agrees with the majority of the three lexicographic
mappings. A few epochs on photo tiles already place black at the bottom and
white at the top of the palette.
"""

from condorcet_morph import SoftConfig, lex_mappings, train
from condorcet_morph.experiment import palette_colors, rank_colors
from condorcet_morph.sample_data import photo_tiles

train_tiles = photo_tiles(10)
val_tiles = photo_tiles(10, offset=100)

cfg = SoftConfig(epochs=10, batch_size=512, tau=1.0, seed=0)
result = train(train_tiles, val_tiles, lex_mappings(), cfg,
               callback=lambda e, tr, val: print(f"epoch {e:2d}  train {tr:.4f}  val {val:.4f}"))

names, palette = palette_colors()
index = {tuple(c): n for n, c in zip(names, palette.tolist())}
print("learned:", " ".join(index[tuple(c)] for c in rank_colors(result.mapping, palette).tolist()))
