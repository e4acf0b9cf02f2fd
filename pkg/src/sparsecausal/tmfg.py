"""Triangulated Maximally Filtered Graph.

The TMFG is grown greedily: start from the 4-clique with the largest total
squared similarity, then repeatedly attach the unused vertex with the
largest gain to one of the current triangular faces. Each attachment adds a
4-clique and consumes the face as a separator, so the result is a chordal
planar graph with ``3N - 6`` edges.
"""

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import DimensionError, NonFiniteError


@dataclass
class ChordalGraph:
    n_vertices: int
    edges: set = field(default_factory=set)  # {(i, j)} with i < j
    cliques: list = field(default_factory=list)  # [(a, b, c, d)] in insertion order
    separators: list = field(default_factory=list)  # [(a, b, c)] in insertion order

    def adjacency(self):
        A = np.zeros((self.n_vertices, self.n_vertices), dtype=bool)
        for i, j in self.edges:
            A[i, j] = A[j, i] = True
        return A

    def neighbors(self):
        nbrs = [set() for _ in range(self.n_vertices)]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return nbrs


def gain_weights(similarity):
    """Squared similarities with a zeroed diagonal, as a C-contiguous array."""
    S = np.asarray(similarity, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionError(f"similarity must be square, got shape {S.shape}")
    if S.shape[0] < 4:
        raise DimensionError(f"TMFG needs at least 4 vertices, got {S.shape[0]}")
    if not np.all(np.isfinite(S)):
        raise NonFiniteError("similarity matrix contains NaN or infinite entries")
    W = 0.5 * (S + S.T)
    W = W * W
    np.fill_diagonal(W, 0.0)
    return np.ascontiguousarray(W)


def tmfg(similarity, backend=None):
    """Build the TMFG of a symmetric similarity (e.g. correlation) matrix.

    Parameters
    ----------
    similarity : (N, N) array_like
        Symmetric and finite; gains use its squared entries, the diagonal is
        ignored.
    backend : module, optional
        Kernel module to use; defaults to the one selected at import.

    Returns
    -------
    ChordalGraph
        Ties in gain are resolved towards the smallest vertex index, then
        the lexicographically smallest face, so the result is deterministic.
    """
    k = backend or kernels
    W = gain_weights(similarity)
    n = W.shape[0]
    seed = tuple(int(v) for v in k.tmfg_seed(W))
    a, b, c, d = seed
    graph = ChordalGraph(n_vertices=n)
    graph.edges = {(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)}
    graph.cliques.append(seed)
    vertices, separators = k.tmfg_grow(W, seed)
    for v, sep in zip(vertices, separators):
        v = int(v)
        sep = tuple(int(x) for x in sep)
        graph.separators.append(sep)
        graph.cliques.append(tuple(sorted(sep + (v,))))
        for x in sep:
            graph.edges.add((min(x, v), max(x, v)))
    return graph


def seed_gain(similarity, quad):
    """Total squared similarity of the six pairs inside ``quad``."""
    W = gain_weights(similarity)
    quad = list(quad)
    return float(sum(W[quad[i], quad[j]] for i in range(4) for j in range(i + 1, 4)))


def maximum_cardinality_search(n, neighbors):
    """Vertex order from maximum cardinality search (Tarjan & Yannakakis)."""
    weight = [0] * n
    numbered = [False] * n
    order = []
    for _ in range(n):
        v = max((u for u in range(n) if not numbered[u]), key=lambda u: (weight[u], -u))
        numbered[v] = True
        order.append(v)
        for u in neighbors[v]:
            if not numbered[u]:
                weight[u] += 1
    return order


def check_chordal(graph):
    """True iff ``graph`` admits a perfect elimination ordering.

    The reverse of a maximum-cardinality-search order is a perfect
    elimination ordering exactly when the graph is chordal; that order is
    then verified directly.
    """
    if isinstance(graph, ChordalGraph):
        n, nbrs = graph.n_vertices, graph.neighbors()
    else:
        A = np.asarray(graph, dtype=bool)
        n = A.shape[0]
        nbrs = [set(np.nonzero(A[i])[0].tolist()) - {i} for i in range(n)]
    order = maximum_cardinality_search(n, nbrs)
    position = {v: k for k, v in enumerate(order)}
    # eliminating in reverse MCS order: each vertex's earlier-numbered
    # neighbours must form a clique
    for v in order:
        earlier = [u for u in nbrs[v] if position[u] < position[v]]
        if not earlier:
            continue
        parent = max(earlier, key=position.__getitem__)
        rest = set(earlier) - {parent}
        if not rest <= nbrs[parent]:
            return False
    return True
