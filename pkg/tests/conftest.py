"""Shared graph builders for the test suite."""

from __future__ import annotations

import numpy as np

from obsmap.graphs import Graph, graph_from_edges


def path_graph(n: int) -> Graph:
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return graph_from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    return graph_from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_graph(n: int) -> Graph:
    return graph_from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def random_connected_graph(seed: int, n_min: int = 4, n_max: int = 30) -> Graph:
    """Random spanning tree plus extra edges; always connected, deterministic."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    edges = {(int(rng.integers(0, v)), v) for v in range(1, n)}
    extra = int(rng.integers(0, max(1, n)))
    for _ in range(extra):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        edges.add(key)
    return graph_from_edges(n, sorted(edges))
