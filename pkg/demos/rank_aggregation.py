"""
Aggregating rankings: Borda, Kemeny and the soft relaxation
============================================================

Five voters rank three candidates. Three of them say 0 < 1 < 2 and two say
2 < 0 < 1. Borda and the Kemeny consensus disagree on where 2 goes.
"""

import numpy as np

from condorcet_morph import (
    borda_scores,
    exact_condorcet_order,
    margin_matrix_from_orders,
    sco_scores,
)

profile = [[0, 1, 2]] * 3 + [[2, 0, 1]] * 2

# average pairwise margins: delta[i, j] > 0 means most voters put i below j
delta = margin_matrix_from_orders(profile)
print(delta)

# Borda averages positions
borda = borda_scores(profile, exact=True)
print("Borda scores:", [str(b) for b in borda])
print("Borda order:", sorted(range(3), key=lambda i: borda[i]))

# the Kemeny consensus minimizes pairwise disagreement over all orders
kemeny = exact_condorcet_order(delta)
print("Kemeny order:", kemeny.order, "objective", kemeny.objective)

# the soft relaxation replaces the step by a logistic and runs gradient descent
soft = sco_scores(delta)
print("soft scores:", np.round(soft.scores, 3), "order:", soft.order)

# with a Condorcet cycle every rotation is equally good
cycle = margin_matrix_from_orders([[0, 1, 2], [1, 2, 0], [2, 0, 1]])
print("cycle:", exact_condorcet_order(cycle))
