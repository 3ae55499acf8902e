"""
Comparing orderings by irregularity
====================================

The irregularity index compares the pixel-wise distance between an image and
its filtered version with the optimal transport cost between their color
histograms. Paired Wilcoxon tests across images rank the orderings, and the
significant relations are drawn as a Hasse diagram in DOT.
"""

import numpy as np

from condorcet_morph import StructuringElement, global_irregularity, opening
from condorcet_morph.evaluation import hasse_from_tests, pairwise_wilcoxon
from condorcet_morph.experiment import resolve_ordering
from condorcet_morph.sample_data import photo_tiles

images = photo_tiles(15, offset=100)
se = StructuringElement.square(3)
methods = ("lex-rgb", "lex-gbr", "lex-brg", "borda")

phi = {m: [] for m in methods}
for img in images:
    for m in methods:
        phi[m].append(global_irregularity(img, opening(img, resolve_ordering(m), se)))

for m, v in phi.items():
    print(f"{m:8s} median {np.median(v):.4f}")

tests = pairwise_wilcoxon(phi, alpha=0.01)
for t in tests:
    print(f"{t.method_a} vs {t.method_b}: W+={t.statistic:g} p={t.pvalue:.4f} {t.direction}")
print(hasse_from_tests(tests, list(methods)))
