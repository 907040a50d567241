"""Independent reference implementations used only by the tests.

Deliberately written with different algorithms than the library: reachability
by set saturation, diameter by Floyd-Warshall, planar hulls by the monotone
chain construction, so agreement is meaningful.
"""

import numpy as np


def reach_set(adj, start):
    """Transitive closure from start by repeated expansion."""
    seen = {start}
    frontier = {start}
    while frontier:
        nxt = set()
        for u in frontier:
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.add(v)
        frontier = nxt
    return seen


def floyd_warshall_diameter(n, edges):
    """All-pairs shortest paths on the sender -> receiver digraph."""
    INF = float("inf")
    dist = [[INF] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    for recv, snd in edges:
        if recv != snd:
            dist[snd][recv] = 1.0
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == INF:
                continue
            di = dist[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
    return int(max(max(row) for row in dist))


def monotone_chain(points):
    """Strict planar hull vertices (collinear edge points excluded),
    returned in lexicographic order."""
    pts = sorted(set(map(tuple, np.asarray(points, dtype=float))))
    if len(pts) == 1:
        return np.asarray(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = set(lower[:-1] + upper[:-1])
    return np.asarray(sorted(hull))
