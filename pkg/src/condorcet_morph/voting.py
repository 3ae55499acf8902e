"""Pairwise vote margins, the Kemeny objective and the Borda rule.

A voter's order is given either as a permutation (candidate indices listed
from least to greatest) or as the 0/1 matrix ``r[i, j] = [x_i <= x_j]``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DataFormatError, DimensionError, InvalidOrderError, ProblemTooLargeError
from .ordering import TableMapping

__all__ = [
    "order_matrix",
    "permutation_from_matrix",
    "validate_total_order_matrix",
    "margin_matrix_from_orders",
    "margin_matrix_from_mappings",
    "kemeny_objective",
    "permutation_objective",
    "KemenyResult",
    "exact_condorcet_order",
    "borda_scores",
    "borda_mapping",
    "BordaRule",
    "read_profile",
]

EXACT_MAX_N = 9


def order_matrix(perm: Sequence[int]) -> np.ndarray:
    """0/1 matrix of the total order listing ``perm`` from least to greatest."""
    perm = [int(p) for p in perm]
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise InvalidOrderError(f"{perm} is not a permutation of 0..{n - 1}")
    pos = np.empty(n, dtype=np.int64)
    pos[perm] = np.arange(n)
    return (pos[:, None] <= pos[None, :]).astype(np.int8)


def permutation_from_matrix(r) -> list[int]:
    r = np.asarray(r)
    ok, msg = validate_total_order_matrix(r)
    if not ok:
        raise InvalidOrderError(msg)
    # the number of candidates below-or-equal to x_i is its position + 1
    pos = r.sum(axis=0) - 1
    return [int(i) for i in np.argsort(pos, kind="stable")]


def validate_total_order_matrix(r) -> tuple[bool, str | None]:
    """Check reflexivity, the pair identity and transitivity constraints.

    Returns ``(True, None)`` or ``(False, description of the first violation)``.
    """
    r = np.asarray(r)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        return False, f"matrix must be square, got shape {r.shape}"
    if not np.all((r == 0) | (r == 1)):
        return False, "entries must be 0 or 1"
    n = r.shape[0]
    for i in range(n):
        if r[i, i] != 1:
            return False, f"reflexivity violated: r[{i}][{i}] = {r[i, i]}"
    for i in range(n):
        for j in range(i + 1, n):
            if r[i, j] + r[j, i] != 1:
                return False, (
                    f"antisymmetry/connectedness violated: r[{i}][{j}] + r[{j}][{i}] = "
                    f"{r[i, j] + r[j, i]}"
                )
    # with the pair identity in place, transitivity fails iff some triple has
    # r[i,j] = r[j,k] = 1 and r[i,k] = 0
    ri = r.astype(np.int64)
    viol = (ri[:, :, None] + ri[None, :, :] - ri[:, None, :]) > 1
    idx = np.arange(n)
    viol &= idx[:, None, None] != idx[None, :, None]
    viol &= idx[None, :, None] != idx[None, None, :]
    viol &= idx[:, None, None] != idx[None, None, :]
    if viol.any():
        i, j, k = (int(v) for v in np.argwhere(viol)[0])
        return False, f"transitivity violated: r[{i}][{j}] + r[{j}][{k}] - r[{i}][{k}] > 1"
    return True, None


def _as_matrices(orders) -> list[np.ndarray]:
    mats = []
    for o in orders:
        a = np.asarray(o)
        if a.ndim == 1:
            mats.append(order_matrix(a))
        else:
            ok, msg = validate_total_order_matrix(a)
            if not ok:
                raise InvalidOrderError(msg)
            mats.append(a.astype(np.int8))
    if not mats:
        raise ValueError("at least one order is required")
    n = mats[0].shape[0]
    if any(m.shape != (n, n) for m in mats):
        raise DimensionError("all orders must rank the same number of candidates")
    return mats


def margin_matrix_from_orders(orders) -> np.ndarray:
    """``delta[i, j]``: mean over voters of ``[x_i <= x_j] - [x_j <= x_i]``."""
    mats = _as_matrices(orders)
    total = np.zeros(mats[0].shape, dtype=np.int64)
    for r in mats:
        total += r.astype(np.int64) - r.T.astype(np.int64)
    return total / len(mats)


def margin_matrix_from_mappings(mappings: Sequence[Callable], values) -> np.ndarray:
    """Margins of the pre-orders induced by ``mappings`` on ``values``.

    A tie under one mapping contributes zero to the pair.
    """
    values = np.asarray(values, dtype=np.float64)
    if not mappings:
        raise ValueError("at least one mapping is required")
    total = np.zeros((len(values), len(values)))
    for h in mappings:
        s = np.asarray(h(values), dtype=np.float64)
        total += np.sign(s[None, :] - s[:, None])
    return total / len(mappings)


def kemeny_objective(delta, r) -> float:
    """Total margin placed against the order ``r``: ``sum_ij delta[i,j] r[j,i]``.

    Lower is better; the order agreeing with every strict majority
    attains the minimum.
    """
    delta = np.asarray(delta, dtype=np.float64)
    r = np.asarray(r)
    if r.ndim == 1:
        r = order_matrix(r)
    if delta.shape != r.shape:
        raise DimensionError(f"margin matrix {delta.shape} and order {r.shape} disagree")
    ok, msg = validate_total_order_matrix(r)
    if not ok:
        raise InvalidOrderError(msg)
    return float(np.sum(delta * r.T))


def permutation_objective(delta, perm: Sequence[int]) -> float:
    """Kemeny objective of a permutation without building its matrix."""
    delta = np.asarray(delta, dtype=np.float64)
    total = 0.0
    for p, a in enumerate(perm):
        for b in perm[p + 1 :]:
            total += delta[b, a]
    return total


class KemenyResult(NamedTuple):
    order: list[int]
    matrix: np.ndarray
    objective: float


def exact_condorcet_order(delta, max_n: int = EXACT_MAX_N, atol: float = 1e-9) -> KemenyResult:
    """Exhaustive minimization of the Kemeny objective.

    Permutations are visited in lexicographic order and only strict
    improvements (beyond ``atol``) replace the incumbent, so ties resolve to
    the lexicographically smallest optimal permutation.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if delta.ndim != 2 or delta.shape[0] != delta.shape[1]:
        raise DimensionError(f"margin matrix must be square, got {delta.shape}")
    n = delta.shape[0]
    if n > max_n:
        raise ProblemTooLargeError(
            f"exhaustive search is capped at n={max_n} (got n={n}); use sco_scores instead"
        )
    if n == 0:
        return KemenyResult([], np.zeros((0, 0), dtype=np.int8), 0.0)

    d = delta.tolist()
    best_cost = np.inf
    best_perm: list[int] = []
    prefix: list[int] = []
    used = [False] * n

    def visit(cost):
        nonlocal best_cost, best_perm
        if len(prefix) == n:
            if cost < best_cost - atol:
                best_cost = cost
                best_perm = prefix.copy()
            return
        for c in range(n):
            if used[c]:
                continue
            row = d[c]
            # placing c above every candidate already in the prefix
            step = sum(row[a] for a in prefix)
            used[c] = True
            prefix.append(c)
            visit(cost + step)
            prefix.pop()
            used[c] = False

    visit(0.0)
    return KemenyResult(best_perm, order_matrix(best_perm), float(best_cost))


def borda_scores(orders, exact: bool = False):
    """Average fraction of rivals ranked at or below each candidate.

    With ``exact=True`` the scores are returned as :class:`fractions.Fraction`.
    """
    mats = _as_matrices(orders)
    m, n = len(mats), mats[0].shape[0]
    if n < 2:
        raise ValueError("Borda scores need at least two candidates")
    counts = np.zeros(n, dtype=np.int64)
    for r in mats:
        # column i counts j with x_j <= x_i, diagonal excluded
        counts += r.sum(axis=0).astype(np.int64) - 1
    if exact:
        return [Fraction(int(c), m * (n - 1)) for c in counts]
    return counts / (m * (n - 1))


def _borda_values(mappings, values: np.ndarray) -> np.ndarray:
    n = len(values)
    if n < 2:
        return np.zeros(n)
    counts = np.zeros(n)
    for h in mappings:
        s = np.asarray(h(values), dtype=np.float64)
        ranked = np.sort(s)
        # number of j != i with h(x_j) <= h(x_i); ties count for both sides
        counts += np.searchsorted(ranked, s, side="right") - 1
    return counts / (len(mappings) * (n - 1))


def borda_mapping(mappings: Sequence[Callable], values) -> TableMapping:
    """Borda scores of ``values`` under the orders induced by ``mappings``."""
    values = np.asarray(values, dtype=np.float64)
    if len(np.unique(values, axis=0)) != len(values):
        raise ValueError("borda_mapping needs distinct values")
    return TableMapping(values, _borda_values(mappings, values), name="borda")


class BordaRule:
    """Borda rule as a set-relative score function.

    Calling it on an array of colors scores every color against the set of
    distinct colors in that same array, which is how a look-up table over an
    image's colors uses it.
    """

    name = "borda"
    dim = 3

    def __init__(self, mappings: Sequence[Callable]):
        self.mappings = list(mappings)

    def __call__(self, colors) -> np.ndarray:
        colors = np.asarray(colors, dtype=np.float64)
        flat = colors.reshape(-1, colors.shape[-1])
        uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
        return _borda_values(self.mappings, uniq)[inverse.ravel()].reshape(colors.shape[:-1])

    def __repr__(self):
        return f"<BordaRule over {len(self.mappings)} mappings>"


def read_profile(path) -> list[list[int]]:
    """Read a vote profile: one voter per line, candidates least to greatest."""
    orders = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                perm = [int(tok) for tok in line.split(",")]
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: expected comma-separated indices") from None
            n = len(perm)
            if sorted(perm) != list(range(n)):
                raise DataFormatError(f"{path}:{lineno}: {perm} is not a permutation of 0..{n - 1}")
            orders.append(perm)
    if not orders:
        raise DataFormatError(f"{path}: empty profile")
    if len({len(o) for o in orders}) != 1:
        raise DataFormatError(f"{path}: voters rank different numbers of candidates")
    return orders
