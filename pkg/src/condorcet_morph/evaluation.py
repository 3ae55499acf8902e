"""Irregularity index, Wilcoxon signed-rank tests and Hasse diagrams."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.stats import rankdata

from .errors import DimensionError, NumericError

__all__ = [
    "IrregularityTerms",
    "color_histogram",
    "transport_cost",
    "irregularity_terms",
    "global_irregularity",
    "quantize_colors",
    "PairwiseTestResult",
    "signed_rank_statistic",
    "exact_signed_rank_pvalue",
    "wilcoxon_signed_rank",
    "pairwise_wilcoxon",
    "hasse_from_tests",
    "summary_rows",
    "summary_csv",
    "phi_csv",
]


# largest number of unit masses solved by assignment; above it the LP is used
ASSIGNMENT_LIMIT = 2048


class IrregularityTerms(NamedTuple):
    pixel_distance: float
    transport: float
    phi: float
    quantized: bool


def color_histogram(image) -> tuple[np.ndarray, np.ndarray]:
    """Unique colors of an image and their pixel counts."""
    img = np.asarray(image, dtype=np.float64)
    return np.unique(img.reshape(-1, img.shape[-1]), axis=0, return_counts=True)


def transport_cost(colors_a, mass_a, colors_b, mass_b) -> float:
    """Exact earth mover's cost between two histograms, L1 ground metric.

    Mass shared by both histograms stays in place at zero cost (valid
    because the ground cost is a metric). Integer remainders, such as
    pixel counts, are split into unit masses and solved as an assignment
    problem; anything else goes to a transportation linear program.
    """
    colors_a = np.asarray(colors_a, dtype=np.float64)
    colors_b = np.asarray(colors_b, dtype=np.float64)
    mass_a = np.asarray(mass_a, dtype=np.float64)
    mass_b = np.asarray(mass_b, dtype=np.float64)
    if not math.isclose(mass_a.sum(), mass_b.sum(), rel_tol=1e-12, abs_tol=1e-12):
        raise DimensionError("histograms must carry the same total mass")

    union, inv = np.unique(np.concatenate([colors_a, colors_b]), axis=0, return_inverse=True)
    inv = inv.ravel()
    a = np.zeros(len(union))
    b = np.zeros(len(union))
    np.add.at(a, inv[: len(colors_a)], mass_a)
    np.add.at(b, inv[len(colors_a) :], mass_b)
    common = np.minimum(a, b)
    a -= common
    b -= common
    src = np.flatnonzero(a > 0)
    dst = np.flatnonzero(b > 0)
    if len(src) == 0:
        return 0.0
    if len(src) == 1 or len(dst) == 1:
        cost = np.abs(union[src][:, None, :] - union[dst][None, :, :]).sum(-1)
        return float(np.sum(cost * (a[src][:, None] if len(dst) == 1 else b[dst][None, :])))

    cost = np.abs(union[src][:, None, :] - union[dst][None, :, :]).sum(-1)
    units = a.sum()
    if units <= ASSIGNMENT_LIMIT and np.array_equal(a, np.rint(a)) and np.array_equal(b, np.rint(b)):
        rows = np.repeat(np.arange(len(src)), a[src].astype(np.int64))
        cols = np.repeat(np.arange(len(dst)), b[dst].astype(np.int64))
        unit_cost = cost[np.ix_(rows, cols)]
        r, c = linear_sum_assignment(unit_cost)
        return float(unit_cost[r, c].sum())
    return _transport_lp(cost, a[src], b[dst])


def _transport_lp(cost, supply, demand) -> float:
    ns, nd = cost.shape
    rows = sparse.kron(sparse.identity(ns, format="csr"), np.ones((1, nd)), format="csr")
    cols = sparse.kron(np.ones((1, ns)), sparse.identity(nd, format="csr"), format="csr")
    A_eq = sparse.vstack([rows, cols], format="csr")
    b_eq = np.concatenate([supply, demand])
    res = linprog(cost.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise NumericError(f"transport problem failed: {res.message}")
    return float(res.fun)


def quantize_colors(image, levels: int) -> np.ndarray:
    """Map every channel to the center of one of ``levels`` uniform bins."""
    img = np.asarray(image, dtype=np.float64)
    k = np.minimum(np.floor(img * levels), levels - 1)
    return (k + 0.5) / levels


def irregularity_terms(I, J, max_colors: int | None = 4096) -> IrregularityTerms:
    """Pixel-wise L1 distance, transport cost and their normalized gap.

    When the two images together hold more than ``max_colors`` distinct
    colors, both are uniformly quantized to at most ``max_colors`` bins
    first and the result is flagged as quantized.
    """
    I = np.asarray(I, dtype=np.float64)
    J = np.asarray(J, dtype=np.float64)
    if I.shape != J.shape:
        raise DimensionError(f"image shapes differ: {I.shape} vs {J.shape}")
    quantized = False
    if max_colors is not None:
        d = I.shape[-1]
        n_union = len(np.unique(np.concatenate([I.reshape(-1, d), J.reshape(-1, d)]), axis=0))
        if n_union > max_colors:
            levels = max(1, int(math.floor(max_colors ** (1.0 / d) + 1e-9)))
            I, J = quantize_colors(I, levels), quantize_colors(J, levels)
            quantized = True
    D = float(np.abs(I - J).sum())
    if D == 0.0:
        return IrregularityTerms(0.0, 0.0, 0.0, quantized)
    W = transport_cost(*color_histogram(I), *color_histogram(J))
    phi = min(1.0, max(0.0, (D - W) / D))
    return IrregularityTerms(D, W, phi, quantized)


def global_irregularity(I, J, max_colors: int | None = 4096) -> float:
    """``(D - W) / D``: 0 for identical images, 1 for a pure pixel permutation."""
    return irregularity_terms(I, J, max_colors).phi


@dataclass(frozen=True)
class PairwiseTestResult:
    method_a: str
    method_b: str
    statistic: float
    pvalue: float
    direction: str
    significant: bool
    n_used: int
    exact: bool

    def lower(self) -> str | None:
        """Method with significantly lower values, if any."""
        if not self.significant:
            return None
        return self.method_b if self.direction == "a greater" else self.method_a


def signed_rank_statistic(a, b) -> tuple[float, float, np.ndarray]:
    """``(W+, W-, ranks)`` after dropping zero differences, average ranks for ties."""
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    d = d[d != 0]
    ranks = rankdata(np.abs(d))
    return float(ranks[d > 0].sum()), float(ranks[d < 0].sum()), ranks


def exact_signed_rank_pvalue(ranks, w_plus: float) -> float:
    """Two-sided p-value of ``W+`` under the permutation (sign-flip) null.

    Average ranks are multiples of 1/2, so the null distribution is built on
    doubled ranks with an integer-indexed convolution. Ties are handled
    exactly.
    """
    r2 = np.rint(2 * np.asarray(ranks)).astype(np.int64)
    total = int(r2.sum())
    dist = np.zeros(total + 1)
    dist[0] = 1.0
    for r in r2:
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[: total + 1 - r]
        dist = 0.5 * (dist + shifted)
    t = int(round(2 * w_plus))
    lower = dist[: t + 1].sum()
    upper = dist[t:].sum()
    return float(min(1.0, 2.0 * min(lower, upper)))


def wilcoxon_signed_rank(
    a,
    b,
    alpha: float = 0.01,
    names: tuple[str, str] = ("a", "b"),
    exact_max_n: int = 25,
    min_pairs: int = 10,
) -> PairwiseTestResult:
    """Two-sided Wilcoxon signed-rank test of paired samples.

    Zero differences are dropped. With at most ``exact_max_n`` remaining
    pairs the exact null distribution is used; otherwise the normal
    approximation with tie-corrected variance and no continuity
    correction. The reported statistic is ``W+``, the rank sum of positive
    ``a - b`` differences.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError("paired samples must be 1-D arrays of equal length")
    if len(a) < min_pairs:
        raise ValueError(f"need at least {min_pairs} pairs, got {len(a)}")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    w_plus, w_minus, ranks = signed_rank_statistic(a, b)
    n = len(ranks)
    if n == 0:
        return PairwiseTestResult(*names, 0.0, 1.0, "none", False, 0, True)
    exact = n <= exact_max_n
    if exact:
        p = exact_signed_rank_pvalue(ranks, w_plus)
    else:
        mean = n * (n + 1) / 4.0
        _, counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(counts**3 - counts) / 48.0
        z = (w_plus - mean) / math.sqrt(var) if var > 0 else 0.0
        p = math.erfc(abs(z) / math.sqrt(2.0))
    if w_plus > w_minus:
        direction = "a greater"
    elif w_minus > w_plus:
        direction = "b greater"
    else:
        direction = "none"
    significant = p < alpha and direction != "none"
    return PairwiseTestResult(*names, w_plus, p, direction, significant, n, exact)


def pairwise_wilcoxon(values: Mapping[str, Sequence[float]], alpha: float = 0.01):
    """Test every unordered pair of methods on their paired per-image values."""
    methods = list(values)
    out = []
    for i, m1 in enumerate(methods):
        for m2 in methods[i + 1 :]:
            out.append(wilcoxon_signed_rank(values[m1], values[m2], alpha, names=(m1, m2)))
    return out


def _quote(name: str) -> str:
    return '"' + name.replace('"', r"\"") + '"'


def hasse_from_tests(results: Sequence[PairwiseTestResult], methods: Sequence[str] | None = None) -> str:
    """DOT text of the "significantly lower values" relation.

    Edges point from the lower-valued (better) method down to the higher
    one and are transitively reduced, so the best methods sit at the top.
    A cyclic relation is emitted unreduced with a warning comment.
    """
    g = nx.DiGraph()
    if methods is None:
        methods = []
        for r in results:
            for m in (r.method_a, r.method_b):
                if m not in methods:
                    methods.append(m)
    g.add_nodes_from(methods)
    for r in results:
        low = r.lower()
        if low is not None:
            high = r.method_b if low == r.method_a else r.method_a
            g.add_edge(low, high)
    lines = ["digraph hasse {", "  rankdir=TB;"]
    if nx.is_directed_acyclic_graph(g):
        reduced = nx.transitive_reduction(g)
    else:
        lines.append("  // WARNING: significance relation is cyclic; transitive reduction skipped")
        reduced = g
    for m in methods:
        lines.append(f"  {_quote(m)};")
    for u in methods:
        for v in methods:
            if reduced.has_edge(u, v):
                lines.append(f"  {_quote(u)} -> {_quote(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def summary_rows(values: Mapping[str, Sequence[float]]) -> list[dict]:
    rows = []
    for m, v in values.items():
        q = np.quantile(np.asarray(v, dtype=np.float64), [0.0, 0.25, 0.5, 0.75, 1.0])
        rows.append(dict(method=m, n=len(v), min=q[0], q1=q[1], median=q[2], q3=q[3], max=q[4]))
    return rows


def summary_csv(values: Mapping[str, Sequence[float]]) -> str:
    buf = io.StringIO()
    fields = ["method", "n", "min", "q1", "median", "q3", "max"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in summary_rows(values):
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})
    return buf.getvalue()


def phi_csv(records: Sequence[tuple]) -> str:
    """``image,method,phi`` rows from ``(image, method, phi)`` tuples."""
    lines = ["image,method,phi"]
    lines += [f"{img},{m},{phi!r}" for img, m, phi in records]
    return "\n".join(lines) + "\n"
