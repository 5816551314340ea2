"""
Control topology construction.

Everything here is a pure function of agent positions. Ties are always broken
toward the smaller agent id (or pair index), so results do not depend on call
order. ``range=None`` means unlimited sensing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dynamics import DEFAULT_B, DEFAULT_K, LinkSet, World


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    """Exactly symmetric Euclidean distance matrix (overflow-safe)."""
    diff = positions[:, None, :] - positions[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _masked_distances(positions: np.ndarray, range_: float | None) -> np.ndarray:
    dist = pairwise_distances(positions)
    np.fill_diagonal(dist, np.inf)
    if range_ is not None:
        dist[dist > range_] = np.inf
    return dist


def neighbors_within_range(world: World, i: int, range_: float | None = None) -> list[int]:
    """Ids within ``range_`` of agent ``i``, nearest first (ties by id)."""
    if not 0 <= i < world.n:
        raise IndexError(f"agent {i} not in world of {world.n}")
    diff = world.positions - world.positions[i]
    dist = np.hypot(diff[:, 0], diff[:, 1])
    dist[i] = np.inf
    if range_ is not None:
        dist[dist > range_] = np.inf
    order = np.argsort(dist, kind="stable")
    return [int(j) for j in order if np.isfinite(dist[j])]


def k_nearest(world: World, i: int, k: int, range_: float | None = None) -> list[int]:
    if k < 1:
        raise ValueError("k must be at least 1")
    return neighbors_within_range(world, i, range_)[:k]


def k_nearest_all(positions: np.ndarray, k: int, range_: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised k-nearest for every agent.

    Returns ``(src, dst)`` arrays listing, for each agent in id order, its
    selected neighbors nearest first.
    """
    n = len(positions)
    if n < 2:
        return np.zeros(0, np.intp), np.zeros(0, np.intp)
    dist = _masked_distances(positions, range_)
    kk = min(k, n - 1)
    order = np.argsort(dist, axis=1, kind="stable")[:, :kk]
    rows = np.repeat(np.arange(n), kk)
    cols = order.reshape(-1)
    keep = np.isfinite(dist[rows, cols])
    return rows[keep], cols[keep]


def dispersion_links(
    world: World,
    L_d: float,
    k: int = 3,
    range_: float | None = None,
    *,
    spring_k: float = DEFAULT_K,
    damping_b: float = DEFAULT_B,
) -> LinkSet:
    """Link every agent to its ``k`` nearest neighbors at rest length ``L_d``."""
    if not L_d > 0:
        raise ValueError("L_d must be positive")
    src, dst = k_nearest_all(world.positions, k, range_)
    return LinkSet(src, dst, L_d, spring_k, damping_b, check=False)


def symmetric_closure(links: LinkSet) -> LinkSet:
    """Add the reverse of every link that lacks one, keeping its parameters.

    Output is ordered by (src, dst).
    """
    if not len(links):
        return links
    src = np.concatenate([links.src, links.dst])
    dst = np.concatenate([links.dst, links.src])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    keep = np.ones(src.size, dtype=bool)
    keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
    rest = np.concatenate([links.rest, links.rest])[order]
    k = np.concatenate([links.k, links.k])[order]
    b = np.concatenate([links.b, links.b])[order]
    return LinkSet(src[keep], dst[keep], rest[keep], k[keep], b[keep], check=False)


class Pair(NamedTuple):
    a: int
    b: int


@dataclass
class PairGraph:
    pairs: list[Pair]
    edges: list[tuple[int, int]] = field(default_factory=list)

    def degree(self) -> list[int]:
        deg = [0] * len(self.pairs)
        for p, q in self.edges:
            deg[p] += 1
            deg[q] += 1
        return deg

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.pairs]
        for p, q in self.edges:
            adj[p].append(q)
            adj[q].append(p)
        return adj

    def components(self) -> list[list[int]]:
        """Connected components of pair indices, each sorted, ordered by smallest member."""
        labels = union_find_labels(len(self.pairs), np.array(self.edges, dtype=np.intp).reshape(-1, 2))
        return _group_labels(labels)


def greedy_pairing(world: World, range_: float | None = None) -> list[Pair]:
    """Globally greedy nearest-first matching.

    Candidate pairs are visited by (distance, smaller id, larger id); a pair is
    taken when both agents are still free.
    """
    n = world.n
    if n < 2:
        return []
    dist = pairwise_distances(world.positions)
    iu, ju = np.triu_indices(n, k=1)
    d = dist[iu, ju]
    ok = np.ones_like(d, dtype=bool) if range_ is None else d <= range_
    iu, ju, d = iu[ok], ju[ok], d[ok]
    order = np.lexsort((ju, iu, d))
    free = np.ones(n, dtype=bool)
    pairs = []
    for idx in order:
        a, b = int(iu[idx]), int(ju[idx])
        if free[a] and free[b]:
            free[a] = free[b] = False
            pairs.append(Pair(a, b))
            if not free.any():
                break
    pairs.sort()
    return pairs


def pair_centroids(world: World, pairs: list[Pair]) -> np.ndarray:
    if not pairs:
        return np.zeros((0, 2))
    idx = np.array(pairs, dtype=np.intp)
    return 0.5 * (world.positions[idx[:, 0]] + world.positions[idx[:, 1]])


def pair_graph(world: World, pairs: list[Pair], range_: float | None = None) -> PairGraph:
    """Chain pairs into a forest of paths.

    Candidate edges join pairs whose centroids are within ``range_``. They are
    inserted nearest first (ties by pair index), skipping any edge that would
    give a pair more than two neighbors or close a cycle. Every pair's nearest
    neighbor edge is therefore attempted before any longer edge touching it.
    """
    m = len(pairs)
    if m == 0:
        raise ValueError("pair_graph needs at least one pair")
    graph = PairGraph(list(pairs))
    if m == 1:
        return graph
    dist = pairwise_distances(pair_centroids(world, pairs))
    iu, ju = np.triu_indices(m, k=1)
    d = dist[iu, ju]
    if range_ is not None:
        ok = d <= range_
        iu, ju, d = iu[ok], ju[ok], d[ok]
    order = np.lexsort((ju, iu, d))
    deg = np.zeros(m, dtype=int)
    uf = UnionFind(m)
    for idx in order:
        p, q = int(iu[idx]), int(ju[idx])
        if deg[p] >= 2 or deg[q] >= 2 or uf.find(p) == uf.find(q):
            continue
        uf.union(p, q)
        deg[p] += 1
        deg[q] += 1
        graph.edges.append((p, q))
        if len(graph.edges) == m - 1:
            break
    return graph


def line_links(
    world: World,
    graph: PairGraph,
    epsilon: float,
    L_d: float,
    *,
    spring_k: float = DEFAULT_K,
    damping_b: float = DEFAULT_B,
) -> LinkSet:
    """Intra-pair links at ``epsilon`` plus all four cross links, both ways, at ``L_d``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not L_d > epsilon:
        raise ValueError("L_d must exceed epsilon")
    src, dst, rest = [], [], []
    for a, b in graph.pairs:
        src += [a, b]
        dst += [b, a]
        rest += [epsilon, epsilon]
    for p, q in graph.edges:
        for u in graph.pairs[p]:
            for v in graph.pairs[q]:
                src += [u, v]
                dst += [v, u]
                rest += [L_d, L_d]
    return LinkSet(src, dst, rest, spring_k, damping_b)


def path_order(graph: PairGraph) -> list[int] | None:
    """Pair indices along the chain if the graph is one path, else None."""
    m = len(graph.pairs)
    if m == 0:
        return None
    if m == 1:
        return [0]
    if len(graph.edges) != m - 1:
        return None
    adj = graph.adjacency()
    ends = [p for p in range(m) if len(adj[p]) == 1]
    if len(ends) != 2 or any(len(a) > 2 for a in adj):
        return None
    order = [ends[0]]
    prev = -1
    while len(order) < m:
        nxt = [q for q in adj[order[-1]] if q != prev]
        prev = order[-1]
        order.append(nxt[0])
    return order


def _end_leader(world: World, end_pair: Pair, neighbor_centroid: np.ndarray) -> int:
    da = np.hypot(*(world.positions[end_pair.a] - neighbor_centroid))
    db = np.hypot(*(world.positions[end_pair.b] - neighbor_centroid))
    if db > da:
        return end_pair.b
    return end_pair.a


def chain_endpoints(world: World, graph: PairGraph) -> tuple[int, int] | None:
    """Interim leaders: one agent at each end of a single connected chain.

    At each end the member of the end pair farther from the adjacent pair's
    centroid is chosen. Returns None unless the graph is one path of two or
    more pairs.
    """
    order = path_order(graph)
    if order is None or len(order) < 2:
        return None
    cents = pair_centroids(world, graph.pairs)
    first = _end_leader(world, graph.pairs[order[0]], cents[order[1]])
    last = _end_leader(world, graph.pairs[order[-1]], cents[order[-2]])
    return first, last


class UnionFind:
    """Disjoint-set forest with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def union_find_labels(n: int, edges: np.ndarray) -> np.ndarray:
    """Component root of every node, via a vectorised disjoint-set forest.

    Roots are hooked onto the smaller root across every edge, then paths are
    fully compressed by pointer jumping; repeated until no edge spans two
    roots. The final root of each component is its smallest member.
    """
    parent = np.arange(n, dtype=np.intp)
    if n == 0 or len(edges) == 0:
        return parent
    u, v = edges[:, 0], edges[:, 1]
    while True:
        ru, rv = parent[u], parent[v]
        cross = ru != rv
        if not cross.any():
            return parent
        lo = np.minimum(ru[cross], rv[cross])
        hi = np.maximum(ru[cross], rv[cross])
        np.minimum.at(parent, hi, lo)
        while True:
            nxt = parent[parent]
            if np.array_equal(nxt, parent):
                break
            parent = nxt


def _group_labels(labels: np.ndarray) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for i, r in enumerate(labels.tolist()):
        groups.setdefault(r, []).append(i)
    return sorted(groups.values(), key=lambda c: c[0])


def proximity_edges(positions: np.ndarray, range_: float) -> np.ndarray:
    n = len(positions)
    iu, ju = np.triu_indices(n, k=1)
    dist = pairwise_distances(positions)[iu, ju]
    keep = dist <= range_
    return np.stack([iu[keep], ju[keep]], axis=1)


def connected_components(world: World, range_: float) -> list[list[int]]:
    """Components of the proximity graph ``|x_i - x_j| <= range_``.

    Each component is sorted; components are ordered by smallest member.
    """
    if not range_ > 0:
        raise ValueError("range must be positive")
    labels = union_find_labels(world.n, proximity_edges(world.positions, range_))
    return _group_labels(labels)


def component_labels(positions: np.ndarray, range_: float) -> np.ndarray:
    return union_find_labels(len(positions), proximity_edges(positions, range_))
