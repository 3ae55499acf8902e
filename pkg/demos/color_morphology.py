"""
Color opening and closing without false colors
===============================================

Operators work on the rank image, so every output pixel is a color that
already occurs in the input. The outputs are written as PPM files.
"""

import tempfile
from pathlib import Path

from condorcet_morph import StructuringElement, closing, opening
from condorcet_morph.experiment import resolve_ordering
from condorcet_morph.imageio import write_image
from condorcet_morph.sample_data import photo_tiles

image = photo_tiles(1)[0]
se = StructuringElement.square(3)
out = Path(tempfile.mkdtemp(prefix="color-morphology-"))
write_image(out / "original.ppm", image)

colors = {tuple(c) for c in image.reshape(-1, 3).tolist()}
for name in ("lex-rgb", "lex-gbr", "lex-brg", "borda"):
    h = resolve_ordering(name)
    for op in (opening, closing):
        result = op(image, h, se)
        write_image(out / f"{op.__name__}_{name}.ppm", result)
        new = {tuple(c) for c in result.reshape(-1, 3).tolist()} - colors
        print(f"{op.__name__:8s} {name:8s} distinct colors {len(colors)} -> "
              f"{len({tuple(c) for c in result.reshape(-1, 3).tolist()})}, false colors {len(new)}")

print("images in", out)
