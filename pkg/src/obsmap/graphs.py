"""Graph construction, BFS distances, and structural statistics.

Vertices are dense integer ids 0..n-1. All graphs are simple and
undirected; adjacency lists are sorted tuples and instances are immutable
after construction. Parameter violations raise ValueError, reachability
violations raise ConnectivityError.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

__all__ = [
    "ConnectivityError",
    "EdgeListParseError",
    "Graph",
    "AnchorSet",
    "GraphStats",
    "ParsedEdgeList",
    "graph_from_edges",
    "random_regular",
    "from_edge_list",
    "serialize_edge_list",
    "write_edge_list",
    "write_token_map",
    "largest_connected_component",
    "bfs_distances",
    "anchor_profile",
    "structural_stats",
]

# Pairing-model attempts before giving up. Rejection probability per draw
# approaches exp((1-r^2)/4) for large n, so this is astronomically safe for
# the supported degrees.
_MAX_PAIRING_ATTEMPTS = 100_000


class ConnectivityError(RuntimeError):
    """A vertex required by the operation is unreachable."""


class EdgeListParseError(ValueError):
    """Malformed edge-list input; message carries the 1-based line number."""


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph on vertices 0..n-1.

    adjacency[v] is the sorted tuple of neighbours of v; edge_count is the
    number of undirected edges.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    edge_count: int

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self.adjacency], dtype=np.int64)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield undirected edges as (u, v) with u < v, lexicographically."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def to_sparse(self) -> csr_matrix:
        """Adjacency matrix as CSR with unit weights."""
        rows = []
        cols = []
        for u, nbrs in enumerate(self.adjacency):
            rows.extend([u] * len(nbrs))
            cols.extend(nbrs)
        data = np.ones(len(rows), dtype=np.float64)
        return csr_matrix((data, (rows, cols)), shape=(self.n, self.n))


@dataclass(frozen=True)
class AnchorSet:
    """Ordered tuple of distinct anchor vertex ids.

    Order is significant: distance profiles are reported in anchor order.
    Membership in a particular graph is checked by the consuming operation.
    """

    anchors: tuple[int, ...]

    def __post_init__(self) -> None:
        anchors = tuple(int(a) for a in self.anchors)
        object.__setattr__(self, "anchors", anchors)
        if len(set(anchors)) != len(anchors):
            raise ValueError("anchor ids must be distinct")
        if any(a < 0 for a in anchors):
            raise ValueError("anchor ids must be non-negative")

    @property
    def k(self) -> int:
        return len(self.anchors)


@dataclass(frozen=True)
class GraphStats:
    n: int
    edge_count: int
    avg_degree: float
    density: float
    diameter: int
    avg_shortest_path_length: float
    avg_clustering: float
    transitivity: float
    degree_variance: float
    degree_gini: float


@dataclass(frozen=True)
class ParsedEdgeList:
    """Result of ingesting a whitespace-separated edge list.

    token_ids maps original vertex tokens to dense ids in first-appearance
    order. duplicate_edges and self_loops count dropped input lines.
    """

    graph: Graph
    token_ids: Mapping[str, int]
    duplicate_edges: int
    self_loops: int


def graph_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a Graph from explicit undirected edges.

    Rejects out-of-range endpoints, self-loops, and duplicate edges; use
    from_edge_list for tolerant ingestion of raw files.
    """
    if n < 0:
        raise ValueError("vertex count must be non-negative")
    seen: set[tuple[int, int]] = set()
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise ValueError(f"duplicate edge ({key[0]}, {key[1]})")
        seen.add(key)
        nbrs[u].append(v)
        nbrs[v].append(u)
    adjacency = tuple(tuple(sorted(a)) for a in nbrs)
    return Graph(n=n, adjacency=adjacency, edge_count=len(seen))


def random_regular(n: int, r: int, seed: int) -> Graph:
    """Sample a connected random r-regular graph by the pairing model.

    Each attempt pairs the n*r half-edge stubs uniformly; attempts with
    self-loops, parallel edges, or a disconnected result are discarded
    whole and redrawn from the same generator stream, so the sample is
    uniform over connected simple r-regular graphs.

    Args:
        n: vertex count, must exceed r.
        r: degree, at least 3.
        seed: generator seed; equal seeds give identical graphs.
    """
    if r < 3:
        raise ValueError("degree must be at least 3")
    if n <= r:
        raise ValueError("vertex count must exceed the degree")
    if (n * r) % 2 != 0:
        raise ValueError("n * r must be even")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), r)
    for _ in range(_MAX_PAIRING_ATTEMPTS):
        rng.shuffle(stubs)
        us = stubs[0::2]
        vs = stubs[1::2]
        if np.any(us == vs):
            continue
        lo = np.minimum(us, vs)
        hi = np.maximum(us, vs)
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            continue
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in zip(lo.tolist(), hi.tolist()):
            nbrs[u].append(v)
            nbrs[v].append(u)
        adjacency = tuple(tuple(sorted(a)) for a in nbrs)
        g = Graph(n=n, adjacency=adjacency, edge_count=len(lo))
        if _is_connected(g):
            return g
    raise RuntimeError(
        f"pairing model failed to produce a simple connected graph "
        f"after {_MAX_PAIRING_ATTEMPTS} attempts (n={n}, r={r})"
    )


def from_edge_list(lines: Iterable[str]) -> ParsedEdgeList:
    """Ingest a whitespace-separated edge list.

    Each non-blank, non-comment line holds two vertex tokens. Tokens are
    re-indexed densely in first-appearance order. Duplicate edges and
    self-loops are dropped and counted (a token seen only on a dropped
    line still registers as a vertex). Lines starting with '#' and blank
    lines are skipped.

    Raises:
        EdgeListParseError: if a line does not hold exactly two tokens;
            the message names the 1-based line number.
    """
    token_ids: dict[str, int] = {}
    edge_set: set[tuple[int, int]] = set()
    duplicate_edges = 0
    self_loops = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(
                f"line {lineno}: expected two vertex tokens, got {len(tokens)}"
            )
        ids = []
        for tok in tokens:
            if tok not in token_ids:
                token_ids[tok] = len(token_ids)
            ids.append(token_ids[tok])
        u, v = ids
        if u == v:
            self_loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in edge_set:
            duplicate_edges += 1
            continue
        edge_set.add(key)
    graph = graph_from_edges(len(token_ids), sorted(edge_set))
    return ParsedEdgeList(
        graph=graph,
        token_ids=token_ids,
        duplicate_edges=duplicate_edges,
        self_loops=self_loops,
    )


def serialize_edge_list(g: Graph) -> Iterator[str]:
    """Yield one 'u v' line per edge, endpoints ascending, lexicographic order."""
    for u, v in g.edges():
        yield f"{u} {v}"


def write_edge_list(g: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in serialize_edge_list(g):
            fh.write(line + "\n")


def write_token_map(token_ids: Mapping[str, int], path: str) -> None:
    """Write token-to-id pairs as TSV in id order."""
    items = sorted(token_ids.items(), key=lambda kv: kv[1])
    with open(path, "w", encoding="utf-8") as fh:
        for token, vid in items:
            fh.write(f"{token}\t{vid}\n")


def _components(g: Graph) -> list[list[int]]:
    """Connected components, each sorted, ordered by smallest member id."""
    seen = [False] * g.n
    comps: list[list[int]] = []
    for root in range(g.n):
        if seen[root]:
            continue
        seen[root] = True
        comp = [root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def _is_connected(g: Graph) -> bool:
    if g.n == 0:
        return False
    seen = [False] * g.n
    seen[0] = True
    count = 1
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == g.n


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component, re-indexed to 0..n'-1.

    Kept vertices are re-indexed in ascending original id order. Among
    equal-size components the one containing the smallest original id wins.
    """
    if g.n == 0:
        raise ValueError("graph has no vertices")
    comps = _components(g)
    best = max(comps, key=len)  # first max: smallest contained id wins ties
    remap = {old: new for new, old in enumerate(best)}
    edges = [
        (remap[u], remap[v])
        for u, v in g.edges()
        if u in remap and v in remap
    ]
    return graph_from_edges(len(best), edges)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from source to every vertex.

    Raises:
        ValueError: source out of range.
        ConnectivityError: some vertex is unreachable from source.
    """
    if not (0 <= source < g.n):
        raise ValueError(f"source {source} out of range for n={g.n}")
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in g.adjacency[u]:
            if dist[v] < 0:
                dist[v] = du + 1
                queue.append(v)
    if np.any(dist < 0):
        missing = int(np.flatnonzero(dist < 0)[0])
        raise ConnectivityError(
            f"vertex {missing} unreachable from source {source}"
        )
    return dist


def anchor_profile(g: Graph, anchors: AnchorSet) -> np.ndarray:
    """Distance profile matrix, shape (n, k): column j is distance to anchor j.

    Column order follows the anchor order. Connectivity errors from BFS
    propagate.
    """
    for a in anchors.anchors:
        if a >= g.n:
            raise ValueError(f"anchor {a} out of range for n={g.n}")
    if anchors.k == 0:
        return np.zeros((g.n, 0), dtype=np.int64)
    cols = [bfs_distances(g, a) for a in anchors.anchors]
    return np.stack(cols, axis=1)


def _all_pairs_distances(g: Graph) -> np.ndarray:
    dist = shortest_path(g.to_sparse(), method="D", directed=False, unweighted=True)
    if np.any(np.isinf(dist)):
        raise ConnectivityError("graph is not connected")
    return dist


def _triangles_per_vertex(g: Graph) -> np.ndarray:
    adj = g.to_sparse()
    # (A @ A) .* A counts, per vertex, ordered neighbour pairs closed by an edge.
    paths = (adj @ adj).multiply(adj)
    return np.asarray(paths.sum(axis=1)).ravel() / 2.0


def structural_stats(g: Graph) -> GraphStats:
    """Structural summary of a connected graph with at least two vertices.

    Clustering of a vertex with degree below 2 is defined as 0. Degree
    variance is the population variance; the Gini coefficient is computed
    on the sorted degree sequence.
    """
    if g.n < 2:
        raise ValueError("structural statistics need at least two vertices")
    degs = g.degrees().astype(np.float64)
    dist = _all_pairs_distances(g)
    iu = np.triu_indices(g.n, k=1)
    pair_dists = dist[iu]
    tri = _triangles_per_vertex(g)

    clustering = np.zeros(g.n, dtype=np.float64)
    mask = degs >= 2
    pairs = degs[mask] * (degs[mask] - 1.0) / 2.0
    clustering[mask] = tri[mask] / pairs

    wedges = float(np.sum(degs * (degs - 1.0) / 2.0))
    closed = float(np.sum(tri))  # equals 3 * triangle count
    transitivity = closed / wedges if wedges > 0 else 0.0

    sorted_degs = np.sort(degs)
    total = float(sorted_degs.sum())
    idx = np.arange(1, g.n + 1, dtype=np.float64)
    gini = float(np.sum((2.0 * idx - g.n - 1.0) * sorted_degs) / (g.n * total))

    return GraphStats(
        n=g.n,
        edge_count=g.edge_count,
        avg_degree=float(degs.mean()),
        density=2.0 * g.edge_count / (g.n * (g.n - 1)),
        diameter=int(pair_dists.max()),
        avg_shortest_path_length=float(pair_dists.mean()),
        avg_clustering=float(clustering.mean()),
        transitivity=transitivity,
        degree_variance=float(np.var(degs)),
        degree_gini=gini,
    )
