"""Directed communication graphs, structural queries, and stochastic weights.

Edge convention: the ordered pair (i, j) is an edge meaning node j can send
to node i. in_adj[i] therefore lists the senders feeding node i and
out_adj[j] lists the receivers fed by node j. Self-loops are mandatory at
every node and every graph must be strongly connected; both properties are
checked at construction time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "DiGraph",
    "StochasticMatrix",
    "generate_digraph",
    "diameter",
    "m_in_neighborhood",
    "make_weights",
    "graph_to_json",
    "graph_from_json",
]

MODELS = ("erdos_renyi", "ring", "complete")


def _bfs_dists(adj, start, n):
    """Hop distances from start along adjacency lists; -1 where unreachable."""
    dist = [-1] * n
    dist[start] = 0
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            du = dist[u]
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = du + 1
                    nxt.append(v)
        frontier = nxt
    return dist


@dataclass(frozen=True)
class DiGraph:
    """Immutable directed graph with mandatory self-loops.

    edges are stored as a lexicographically sorted tuple of (receiver,
    sender) pairs. seed and model are provenance metadata kept so a graph
    can be serialized reproducibly; they are optional for hand-built graphs.
    """

    n: int
    edges: tuple
    seed: int | None = None
    model: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one node, got n={self.n}")
        pairs = sorted({(int(i), int(j)) for i, j in self.edges})
        for i, j in pairs:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
        present = set(pairs)
        for i in range(self.n):
            if (i, i) not in present:
                raise ValueError(f"node {i} is missing its self-loop")
        object.__setattr__(self, "edges", tuple(pairs))
        # strong connectivity: node 0 reaches everyone and everyone reaches it
        if -1 in _bfs_dists(self.out_adj, 0, self.n):
            raise ValueError("graph is not strongly connected")
        if -1 in _bfs_dists(self.in_adj, 0, self.n):
            raise ValueError("graph is not strongly connected")

    @cached_property
    def in_adj(self) -> tuple:
        """in_adj[i] = ascending senders j with an edge j -> i."""
        lists = [[] for _ in range(self.n)]
        for i, j in self.edges:
            lists[i].append(j)
        return tuple(tuple(l) for l in lists)

    @cached_property
    def out_adj(self) -> tuple:
        """out_adj[j] = ascending receivers i with an edge j -> i."""
        lists = [[] for _ in range(self.n)]
        for i, j in self.edges:
            lists[j].append(i)
        return tuple(tuple(sorted(l)) for l in lists)

    @cached_property
    def edge_arrays(self):
        """(dst, src) int arrays over edges sorted by (receiver, sender).

        This fixed ordering is what makes every per-node reduction in the
        engines run over ascending sender index, the determinism contract.
        """
        arr = np.asarray(self.edges, dtype=np.intp).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    @cached_property
    def diameter(self) -> int:
        """Longest shortest directed path over all ordered node pairs."""
        best = 0
        for s in range(self.n):
            best = max(best, max(_bfs_dists(self.out_adj, s, self.n)))
        return best


def diameter(g: DiGraph) -> int:
    return g.diameter


def m_in_neighborhood(g: DiGraph, i: int, m: int) -> frozenset:
    """Nodes from which i is reachable in at most m hops (including i)."""
    if not (0 <= i < g.n):
        raise ValueError(f"node {i} out of range for n={g.n}")
    if m < 0:
        raise ValueError(f"need m >= 0, got {m}")
    dist = {i: 0}
    frontier = [i]
    for _ in range(m):
        nxt = []
        for u in frontier:
            for v in g.in_adj[u]:
                if v not in dist:
                    dist[v] = 0
                    nxt.append(v)
        if not nxt:
            break
        frontier = nxt
    return frozenset(dist)


def _er_attempt(rng, n, p):
    # mask[a, b] True means a sends to b, i.e. edge pair (b, a)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, True)
    return mask


def _mask_strongly_connected(mask, n):
    out_adj = [np.nonzero(mask[a])[0] for a in range(n)]
    in_adj = [np.nonzero(mask[:, b])[0] for b in range(n)]
    return -1 not in _bfs_dists(out_adj, 0, n) and -1 not in _bfs_dists(in_adj, 0, n)


def generate_digraph(n: int, model: str = "erdos_renyi", seed: int = 0,
                     edge_prob: float = 0.5) -> DiGraph:
    """Build a strongly connected digraph with self-loops.

    erdos_renyi draws each off-diagonal directed link independently with
    probability edge_prob and rejection-samples until strongly connected
    (at most 1000 attempts, then an error: the budget failing means the
    probability is too small for this n). ring is the directed n-cycle,
    complete has every ordered pair. Identical (n, model, seed, edge_prob)
    always yields an identical graph.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}, expected one of {MODELS}")
    if model == "ring":
        edges = [(i, i) for i in range(n)] + [((j + 1) % n, j) for j in range(n)]
        return DiGraph(n, tuple(edges), seed=seed, model=model)
    if model == "complete":
        edges = [(i, j) for i in range(n) for j in range(n)]
        return DiGraph(n, tuple(edges), seed=seed, model=model)
    if not (0.0 < edge_prob <= 1.0):
        raise ValueError(f"edge_prob must be in (0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        mask = _er_attempt(rng, n, edge_prob)
        if _mask_strongly_connected(mask, n):
            senders, receivers = np.nonzero(mask)
            edges = tuple(zip(receivers.tolist(), senders.tolist()))
            return DiGraph(n, edges, seed=seed, model=model)
    raise RuntimeError(
        f"no strongly connected draw in 1000 attempts (n={n}, edge_prob={edge_prob}); "
        "raise edge_prob")


@dataclass(frozen=True)
class StochasticMatrix:
    """Dense nonnegative weight matrix tied to a graph's sparsity.

    Both kinds are stored receiver-row, sender-column: w[i, j] > 0 exactly
    when (i, j) is an edge. kind "column" normalizes each sender's column
    to 1 (push-sum splitting); kind "row" normalizes each receiver's row
    to 1 (averaging).
    """

    kind: str
    w: np.ndarray
    graph: DiGraph

    def __post_init__(self):
        if self.kind not in ("column", "row"):
            raise ValueError(f"kind must be 'column' or 'row', got {self.kind!r}")
        w = np.array(self.w, dtype=float)
        n = self.graph.n
        if w.shape != (n, n):
            raise ValueError(f"weight shape {w.shape} does not match n={n}")
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        expected = np.zeros((n, n), dtype=bool)
        dst, src = self.graph.edge_arrays
        expected[dst, src] = True
        if not np.array_equal(w > 0, expected):
            raise ValueError("weight sparsity does not match the edge set")
        sums = w.sum(axis=0) if self.kind == "column" else w.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-12:
            raise ValueError(f"{self.kind} sums deviate from 1 by {np.abs(sums - 1.0).max():.3e}")
        if (np.diag(w) <= 0).any():
            raise ValueError("diagonal weights must be strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @cached_property
    def edge_weights(self) -> np.ndarray:
        """Weights aligned with graph.edge_arrays order."""
        dst, src = self.graph.edge_arrays
        return self.w[dst, src]


def make_weights(g: DiGraph, kind: str) -> StochasticMatrix:
    """Equal-splitting weights: column kind gives each sender's out-edges
    weight 1/out_degree, row kind gives each receiver's in-edges weight
    1/in_degree. Self-loops keep every diagonal entry positive."""
    w = np.zeros((g.n, g.n))
    if kind == "column":
        for s in range(g.n):
            recv = np.asarray(g.out_adj[s], dtype=np.intp)
            w[recv, s] = 1.0 / len(recv)
    elif kind == "row":
        for r in range(g.n):
            snd = np.asarray(g.in_adj[r], dtype=np.intp)
            w[r, snd] = 1.0 / len(snd)
    else:
        raise ValueError(f"kind must be 'column' or 'row', got {kind!r}")
    return StochasticMatrix(kind, w, g)


def graph_to_json(g: DiGraph) -> str:
    """Serialize as {n, edges, seed, model}; edges in lexicographic order."""
    return json.dumps({
        "n": g.n,
        "edges": [list(e) for e in g.edges],
        "seed": g.seed,
        "model": g.model,
    })


def graph_from_json(text: str) -> DiGraph:
    obj = json.loads(text)
    return DiGraph(obj["n"], tuple((i, j) for i, j in obj["edges"]),
                   seed=obj.get("seed"), model=obj.get("model"))
