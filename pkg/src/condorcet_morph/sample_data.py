"""Small natural-image tiles for demos and tests when CIFAR-10 is not at hand.

The photos bundled with scikit-image are block-averaged and cut into 32x32
tiles, which gives CIFAR-sized images with natural color statistics.
"""
from __future__ import annotations

import numpy as np

PHOTOS = ("astronaut", "coffee", "chelsea", "rocket", "immunohistochemistry")


def _block_mean(img: np.ndarray, factor: int) -> np.ndarray:
    h = img.shape[0] // factor * factor
    w = img.shape[1] // factor * factor
    blocks = img[:h, :w].reshape(h // factor, factor, w // factor, factor, -1)
    return blocks.mean(axis=(1, 3))


def photo_tiles(count: int, side: int = 32, factor: int = 2, offset: int = 0) -> list[np.ndarray]:
    """``count`` tiles (after skipping ``offset``) as float images in ``k/255``.

    Tiles are taken photo by photo in row-major order, so the sequence is
    deterministic. Requires scikit-image.
    """
    import skimage.data

    tiles = []
    for name in PHOTOS:
        photo = getattr(skimage.data, name)()[..., :3].astype(np.float64)
        small = np.rint(_block_mean(photo, factor))
        for y in range(0, small.shape[0] - side + 1, side):
            for x in range(0, small.shape[1] - side + 1, side):
                tiles.append(small[y : y + side, x : x + side] / 255.0)
    if offset + count > len(tiles):
        raise ValueError(f"only {len(tiles)} tiles available")
    # interleave photos so any prefix mixes sources
    order = np.random.default_rng(12345).permutation(len(tiles))
    return [tiles[i] for i in order[offset : offset + count]]
