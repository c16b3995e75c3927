"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written in a different style from the
production code (full matrices, union-find, per-pair loops) so a shared
bug is unlikely.  Keep these slow and obvious.
"""

from __future__ import annotations

import numpy as np

NOISE = -1


def dbscan_oracle(vectors: np.ndarray, eps: float, min_pts: int) -> list[int]:
    """Brute-force DBSCAN over cosine distance.

    Clusters are connected components of the core-core adjacency graph.
    Component ids follow the smallest input index among a component's
    core points.  A border point joins the earliest-created component
    that has a core within eps; points adjacent to no core are noise.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    sims = vectors @ vectors.T
    within = sims >= (1.0 - eps)
    degree = within.sum(axis=1)
    core = degree >= min_pts

    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for i in range(n):
        if not core[i]:
            continue
        for j in range(i + 1, n):
            if core[j] and within[i, j]:
                union(i, j)

    component_order: dict[int, int] = {}
    for i in range(n):
        if core[i]:
            root = find(i)
            if root not in component_order:
                component_order[root] = len(component_order)

    labels = [NOISE] * n
    for i in range(n):
        if core[i]:
            labels[i] = component_order[find(i)]
    for i in range(n):
        if core[i]:
            continue
        adjacent = [
            component_order[find(j)] for j in range(n) if core[j] and within[i, j]
        ]
        if adjacent:
            labels[i] = min(adjacent)
    return labels


def dl_oracle(a: str, b: str) -> int:
    """Optimal-string-alignment distance via the full DP matrix."""
    rows, cols = len(a) + 1, len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            best = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                best = min(best, d[i - 2][j - 2] + 1)
            d[i][j] = best
    return d[rows - 1][cols - 1]


def detect_oracle(
    query_vec: np.ndarray,
    ref_vectors: np.ndarray,
    ref_domains: list[str],
    owner_cluster: list[int],
    rules: dict,
    t: float,
    k: int,
    query_domain,
) -> tuple[str, int | None, list[tuple[str, float]]]:
    """O(n) inner loop of the O(mn) double-loop detector.

    Similarity is Eq.-1 cosine computed per pair: dot(u, v) divided by
    the product of the norms.  Returns (verdict, nearest_cluster,
    matches) with verdict in {"gsd", "rejected_by_rule", "not_similar"}.
    """
    qn = float(np.sqrt(np.dot(query_vec, query_vec)))
    matches: list[tuple[str, float, int]] = []
    for row in range(ref_vectors.shape[0]):
        ref = ref_vectors[row]
        rn = float(np.sqrt(np.dot(ref, ref)))
        sim = float(np.dot(query_vec, ref)) / (qn * rn)
        if sim >= t:
            matches.append((ref_domains[row], sim, owner_cluster[row]))
    matches.sort(key=lambda m: (-m[1], m[0]))
    out = [(d, s) for d, s, _ in matches]
    if not matches:
        return "not_similar", None, out
    nearest = matches[0][2]
    if len(matches) < k:
        return "not_similar", nearest, out
    rule = rules.get(nearest)
    if rule is not None and not rule.matches(query_domain):
        return "rejected_by_rule", nearest, out
    return "gsd", nearest, out


def set_difference_oracle(today: list[str], yesterday: list[str]) -> list[str]:
    return sorted(set(today) - set(yesterday))
