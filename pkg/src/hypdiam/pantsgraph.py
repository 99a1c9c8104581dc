"""Configuration-model random cubic multigraphs on 2g-2 vertices.

Half-edge h belongs to vertex h // 3 with local index h % 3.  A graph is
a fixed-point-free involution (perfect matching) of the 6g-6 half-edges;
loops and multi-edges are kept, as the gluing construction requires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputRangeError


@dataclass(frozen=True)
class PantsGraph:
    genus: int
    matching: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matching, dtype=np.int64)
        object.__setattr__(self, "matching", m)
        if self.genus < 2:
            raise InputRangeError("genus must be >= 2")
        k = 6 * self.genus - 6
        if m.shape != (k,):
            raise InputRangeError(f"matching must cover exactly {k} half-edges")
        if np.any(m[m] != np.arange(k)) or np.any(m == np.arange(k)):
            raise InputRangeError("matching must be a fixed-point-free involution")

    @property
    def num_vertices(self):
        return 2 * self.genus - 2

    @property
    def num_half_edges(self):
        return 6 * self.genus - 6

    def neighbors(self):
        """(n, 3) array: vertex at the far end of each local half-edge."""
        return (self.matching // 3).reshape(-1, 3)


def sample_configuration_model(g: int, seed: int) -> PantsGraph:
    """Uniform random perfect matching of the 6g-6 half-edges.

    A uniform shuffle paired off consecutively hits every matching with
    equal probability (each matching has the same number of orderings).
    """
    if g < 2:
        raise InputRangeError("genus must be >= 2")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    perm = rng.permutation(6 * g - 6)
    matching = np.empty(6 * g - 6, dtype=np.int64)
    matching[perm[0::2]] = perm[1::2]
    matching[perm[1::2]] = perm[0::2]
    return PantsGraph(genus=g, matching=matching)


def is_connected(graph: PantsGraph) -> bool:
    nbr = graph.neighbors()
    n = graph.num_vertices
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = np.array([0])
    while frontier.size:
        nxt = np.unique(nbr[frontier].ravel())
        nxt = nxt[~seen[nxt]]
        seen[nxt] = True
        frontier = nxt
    return bool(seen.all())


def graph_diameter(graph: PantsGraph) -> float:
    """Max over vertex pairs of unweighted shortest-path length.

    Returns math.inf for disconnected graphs.
    """
    nbr = graph.neighbors()
    n = graph.num_vertices
    ecc = 0
    for src in range(n):
        dist = np.full(n, -1, dtype=np.int32)
        dist[src] = 0
        frontier = np.array([src])
        d = 0
        while frontier.size:
            d += 1
            nxt = np.unique(nbr[frontier].ravel())
            nxt = nxt[dist[nxt] < 0]
            dist[nxt] = d
            frontier = nxt
        if np.any(dist < 0):
            return math.inf
        ecc = max(ecc, int(dist.max()))
    return ecc
