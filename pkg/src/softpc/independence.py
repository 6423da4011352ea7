"""Weighted chi-square independence testing and scope partitioning.

Pairwise tests over the active scope build an undirected dependency graph;
connected components of that graph become the child scopes of a product
node.  Continuous variables are discretized into weighted equal-frequency
bins before testing, so all tests share the same frequency interpretation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import chdtrc


@dataclass(frozen=True)
class Chi2Result:
    stat: float
    dof: int
    p_value: float


def discretize(values, weights, bins: int):
    """Bin a continuous column into weighted equal-frequency bins.

    Returns ``(codes, edges)`` where codes are bin indices in
    ``{0..len(edges)}`` and edges are cut points (midpoints between the
    adjacent distinct values).  If fewer distinct values than bins exist,
    the bin count is reduced accordingly.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    uniq, inv = np.unique(values, return_inverse=True)
    if uniq.size == 1:
        return np.zeros(values.shape, dtype=np.int64), np.empty(0)
    uw = np.bincount(inv, weights=weights, minlength=uniq.size)
    cum = np.cumsum(uw)
    total = cum[-1]
    cut_idx = set()
    for k in range(1, bins):
        target = total * k / bins
        i = int(np.searchsorted(cum, target))
        # cut after uniq[i]; a cut after the last value is meaningless
        if i < uniq.size - 1:
            cut_idx.add(i)
    edges = np.array([(uniq[i] + uniq[i + 1]) / 2.0 for i in sorted(cut_idx)])
    codes = np.searchsorted(edges, values, side="left").astype(np.int64)
    return codes, edges


def weighted_chi2(x, y, weights) -> Chi2Result:
    """Pearson chi-square test of independence on a weighted contingency table.

    Observed cell (i, j) is the total weight of rows with x == i and
    y == j; expected cells come from the margins.  Cells with zero
    expected weight are skipped and categories with zero margin do not
    count toward the degrees of freedom.  Tables with a single effective
    row/column, or with total weight below ``2 * r * c``, return
    ``p_value = 1`` (no usable evidence of dependence).
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    weights = np.asarray(weights, dtype=float)
    if not (x.shape == y.shape == weights.shape):
        raise ValueError("x, y, weights must have equal length")
    if np.any(weights <= 0):
        raise ValueError("weights must be positive")

    nx, ny = int(x.max()) + 1, int(y.max()) + 1
    table = np.bincount(x * ny + y, weights=weights, minlength=nx * ny).reshape(nx, ny)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    r, c = table.shape
    if r <= 1 or c <= 1:
        return Chi2Result(0.0, 0, 1.0)

    total = table.sum()
    if total < 2.0 * r * c:
        # too little effective mass for the asymptotic test to mean anything
        return Chi2Result(0.0, (r - 1) * (c - 1), 1.0)

    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / total
    mask = expected > 0
    stat = float(((table - expected)[mask] ** 2 / expected[mask]).sum())
    dof = (r - 1) * (c - 1)
    return Chi2Result(stat, dof, chi2_sf(stat, dof))


def chi2_sf(stat: float, dof: int) -> float:
    """Upper tail of the chi-square distribution (regularized incomplete gamma)."""
    if dof <= 0:
        return 1.0
    if stat <= 0:
        return 1.0
    return float(chdtrc(dof, stat))


def partition_scope(matrix, weights, scope, schema, p_threshold: float, bins: int = 4):
    """Split the active scope into approximately independent variable groups.

    Runs the weighted chi-square test on every pair of scope variables
    (continuous columns discretized first) and returns the connected
    components of the resulting dependency graph, each sorted, ordered by
    their smallest variable.
    """
    scope = list(scope)
    if len(scope) < 2:
        return [sorted(scope)]
    matrix = np.asarray(matrix)
    weights = np.asarray(weights, dtype=float)

    codes = {}
    for v in scope:
        col = matrix[:, v]
        if schema.is_cat(v):
            codes[v] = col.astype(np.int64)
        else:
            codes[v], _ = discretize(col, weights, bins)

    adj = {v: set() for v in scope}
    for i, a in enumerate(scope):
        for b in scope[i + 1 :]:
            res = weighted_chi2(codes[a], codes[b], weights)
            if res.p_value < p_threshold:
                adj[a].add(b)
                adj[b].add(a)

    seen = set()
    groups = []
    for v in sorted(scope):
        if v in seen:
            continue
        comp, stack = [], [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        groups.append(sorted(comp))
    return groups
