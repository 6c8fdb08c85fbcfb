"""Graph construction, BFS, and structural statistics against brute-force
oracles."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from obsmap.graphs import (
    AnchorSet,
    ConnectivityError,
    EdgeListParseError,
    anchor_profile,
    bfs_distances,
    from_edge_list,
    graph_from_edges,
    largest_connected_component,
    random_regular,
    serialize_edge_list,
    structural_stats,
    write_token_map,
)
from obsmap.harness import graph_seed_for

from conftest import (
    complete_graph,
    cycle_graph,
    path_graph,
    random_connected_graph,
    star_graph,
)

INF = float("inf")


def floyd_warshall(g) -> list[list[float]]:
    n = g.n
    dist = [
        [0.0 if i == j else (1.0 if j in g.adjacency[i] else INF) for j in range(n)]
        for i in range(n)
    ]
    for mid in range(n):
        for i in range(n):
            dmi = dist[i][mid]
            if dmi == INF:
                continue
            row = dist[i]
            mid_row = dist[mid]
            for j in range(n):
                cand = dmi + mid_row[j]
                if cand < row[j]:
                    row[j] = cand
    return dist


def naive_stats(g) -> dict:
    """Independent O(n^3) recomputation of every structural statistic."""
    n = g.n
    adj = [set(nb) for nb in g.adjacency]
    dist = floyd_warshall(g)
    pairs = [dist[i][j] for i in range(n) for j in range(i + 1, n)]
    assert all(d < INF for d in pairs)
    degs = [len(a) for a in adj]
    tri = []
    for v in range(n):
        nb = sorted(adj[v])
        t = 0
        for i in range(len(nb)):
            for j in range(i + 1, len(nb)):
                if nb[j] in adj[nb[i]]:
                    t += 1
        tri.append(t)
    clustering = [
        0.0 if degs[v] < 2 else tri[v] / (degs[v] * (degs[v] - 1) / 2.0)
        for v in range(n)
    ]
    wedges = sum(d * (d - 1) / 2.0 for d in degs)
    mean_deg = sum(degs) / n
    total = sum(degs)
    return {
        "density": 2.0 * g.edge_count / (n * (n - 1)),
        "diameter": int(max(pairs)),
        "avg_path": sum(pairs) / len(pairs),
        "avg_clustering": sum(clustering) / n,
        "transitivity": (sum(tri) / wedges) if wedges > 0 else 0.0,
        "variance": sum((d - mean_deg) ** 2 for d in degs) / n,
        "gini": sum(abs(a - b) for a in degs for b in degs) / (2.0 * n * total),
    }


class TestGraphFromEdges:
    def test_builds_sorted_adjacency(self):
        g = graph_from_edges(4, [(2, 0), (0, 1), (3, 1)])
        assert g.adjacency == ((1, 2), (0, 3), (0,), (1,))
        assert g.edge_count == 3
        assert g.degrees().tolist() == [2, 2, 1, 1]

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            graph_from_edges(3, [(1, 1)])

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError, match="duplicate"):
            graph_from_edges(3, [(0, 1), (1, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            graph_from_edges(2, [(0, 2)])


class TestRandomRegular:
    def test_k4_is_forced(self):
        for seed in range(5):
            g = random_regular(4, 3, seed)
            assert g.adjacency == ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))

    @pytest.mark.parametrize("n,r", [(500, 3), (20, 4), (11, 4), (10, 5)])
    def test_degrees_simple_connected(self, n, r):
        g = random_regular(n, r, 12345)
        degs = g.degrees()
        assert degs.min() == degs.max() == r
        for v, nbrs in enumerate(g.adjacency):
            assert list(nbrs) == sorted(set(nbrs))
            assert v not in nbrs
            for u in nbrs:
                assert v in g.adjacency[u]
        assert bfs_distances(g, 0).max() >= 1  # raises if disconnected

    def test_deterministic_in_seed(self):
        a = random_regular(60, 3, 7)
        b = random_regular(60, 3, 7)
        c = random_regular(60, 3, 8)
        assert a.adjacency == b.adjacency
        assert a.adjacency != c.adjacency

    def test_parameter_errors(self):
        with pytest.raises(ValueError):
            random_regular(10, 2, 0)
        with pytest.raises(ValueError):
            random_regular(3, 3, 0)
        with pytest.raises(ValueError):
            random_regular(5, 3, 0)

    def test_diameter_regression_n1000(self):
        # Exact diameters for these 20 derived seeds measured 12..13 (19 of
        # 20 at 13).  Sampled eccentricities lower-bound the diameter, so the
        # window [11, 14] holds with headroom on both sides.
        for trial in range(20):
            g = random_regular(1000, 3, graph_seed_for(0, 1000, 3, trial))
            ecc = max(
                int(bfs_distances(g, v).max()) for v in range(0, 1000, 211)
            )
            assert 11 <= ecc <= 14


class TestBfs:
    def test_path_example(self):
        assert bfs_distances(path_graph(3), 0).tolist() == [0, 1, 2]

    def test_k4_example(self):
        assert bfs_distances(complete_graph(4), 2).tolist() == [1, 1, 0, 1]

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_matches_floyd_warshall(self, seed):
        g = random_connected_graph(seed, n_max=50)
        oracle = floyd_warshall(g)
        mat = np.stack([bfs_distances(g, s) for s in range(g.n)])
        assert np.array_equal(mat, np.array(oracle, dtype=np.int64))
        assert np.array_equal(mat, mat.T)
        rng = np.random.default_rng(seed)
        for _ in range(20):
            i, j, k3 = rng.integers(0, g.n, size=3)
            assert mat[i][j] <= mat[i][k3] + mat[k3][j]

    def test_unreachable_raises(self):
        g = graph_from_edges(4, [(0, 1), (2, 3)])
        with pytest.raises(ConnectivityError):
            bfs_distances(g, 0)

    def test_source_out_of_range(self):
        with pytest.raises(ValueError):
            bfs_distances(path_graph(3), 3)


class TestAnchorProfile:
    def test_star_center(self):
        g = star_graph(3)
        prof = anchor_profile(g, AnchorSet((0,)))
        assert prof.tolist() == [[0], [1], [1], [1]]

    def test_path_two_anchors_injective(self):
        g = path_graph(4)
        prof = anchor_profile(g, AnchorSet((0, 3)))
        rows = [tuple(r) for r in prof.tolist()]
        assert rows == [(0, 3), (1, 2), (2, 1), (3, 0)]
        assert len(set(rows)) == 4

    def test_duplicate_anchor_rejected_at_construction(self):
        with pytest.raises(ValueError, match="distinct"):
            AnchorSet((1, 1))

    def test_anchor_out_of_range(self):
        with pytest.raises(ValueError):
            anchor_profile(path_graph(3), AnchorSet((5,)))

    def test_empty_anchor_set(self):
        prof = anchor_profile(path_graph(3), AnchorSet(()))
        assert prof.shape == (3, 0)


class TestFromEdgeList:
    def test_path(self):
        parsed = from_edge_list(["0 1", "1 2"])
        assert parsed.graph.n == 3
        assert parsed.graph.edge_count == 2
        assert parsed.duplicate_edges == 0
        assert parsed.self_loops == 0

    def test_duplicates_and_self_loops_dropped(self):
        parsed = from_edge_list(["a b", "b a", "a a"])
        assert parsed.graph.n == 2
        assert parsed.graph.edge_count == 1
        assert parsed.duplicate_edges == 1
        assert parsed.self_loops == 1
        assert parsed.token_ids == {"a": 0, "b": 1}

    def test_first_appearance_order(self):
        parsed = from_edge_list(["x9 c", "c a", "a x9"])
        assert parsed.token_ids == {"x9": 0, "c": 1, "a": 2}

    def test_comments_and_blanks_skipped(self):
        parsed = from_edge_list(["# header", "", "0 1", "   ", "# tail"])
        assert parsed.graph.edge_count == 1

    def test_malformed_line_number(self):
        with pytest.raises(EdgeListParseError, match="line 3"):
            from_edge_list(["0 1", "1 2", "2 3 4"])

    def test_self_loop_only_token_is_isolated_vertex(self):
        parsed = from_edge_list(["a b", "c c"])
        assert parsed.graph.n == 3
        assert parsed.graph.degree(2) == 0

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_serialize_round_trip(self, seed):
        # Parsing re-indexes by first appearance, so the round trip is an
        # isomorphism under the token map, not an identity on labels.
        g = random_connected_graph(seed)
        parsed = from_edge_list(serialize_edge_list(g))
        assert parsed.graph.n == g.n
        assert parsed.graph.edge_count == g.edge_count
        relabel = {v: parsed.token_ids[str(v)] for v in range(g.n)}
        for u in range(g.n):
            mapped = sorted(relabel[w] for w in g.adjacency[u])
            assert tuple(mapped) == parsed.graph.adjacency[relabel[u]]


class TestLargestConnectedComponent:
    def test_two_triangles_plus_isolated(self):
        g = graph_from_edges(
            7, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
        )
        lcc = largest_connected_component(g)
        assert lcc.n == 3
        assert lcc.edge_count == 3
        assert lcc.adjacency == ((1, 2), (0, 2), (0, 1))

    def test_connected_graph_is_identity(self):
        g = random_connected_graph(3)
        lcc = largest_connected_component(g)
        assert lcc.adjacency == g.adjacency

    def test_tie_goes_to_smallest_id(self):
        # components {0,1,2,3} as a path and {4,5,6,7} as a cycle
        g = graph_from_edges(
            8, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7), (4, 7)]
        )
        lcc = largest_connected_component(g)
        assert lcc.n == 4
        assert lcc.edge_count == 3  # the path component, containing vertex 0

    def test_empty_graph_rejected(self):
        with pytest.raises(ValueError):
            largest_connected_component(graph_from_edges(0, []))


class TestStructuralStats:
    def test_k4(self):
        s = structural_stats(complete_graph(4))
        assert s.density == 1.0
        assert s.diameter == 1
        assert s.avg_shortest_path_length == 1.0
        assert s.avg_clustering == 1.0
        assert s.transitivity == 1.0
        assert s.degree_variance == 0.0
        assert s.degree_gini == 0.0

    def test_star(self):
        s = structural_stats(star_graph(3))
        assert s.avg_degree == 1.5
        assert s.density == 0.5
        assert s.diameter == 2
        assert s.avg_clustering == 0.0
        assert s.transitivity == 0.0
        assert s.degree_variance == pytest.approx(0.75)
        assert s.degree_gini == pytest.approx(0.25)

    def test_regular_graph_degree_spread_is_zero(self):
        s = structural_stats(random_regular(30, 3, 5))
        assert s.degree_variance == 0.0
        assert s.degree_gini == 0.0
        assert s.avg_degree == 3.0

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_matches_naive_oracle(self, seed):
        g = random_connected_graph(seed, n_max=30)
        s = structural_stats(g)
        o = naive_stats(g)
        assert s.diameter == o["diameter"]
        assert s.density == pytest.approx(o["density"], abs=1e-12)
        assert s.avg_shortest_path_length == pytest.approx(o["avg_path"], abs=1e-12)
        assert s.avg_clustering == pytest.approx(o["avg_clustering"], abs=1e-12)
        assert s.transitivity == pytest.approx(o["transitivity"], abs=1e-12)
        assert s.degree_variance == pytest.approx(o["variance"], abs=1e-12)
        assert s.degree_gini == pytest.approx(o["gini"], abs=1e-12)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            structural_stats(graph_from_edges(1, []))

    def test_disconnected_rejected(self):
        with pytest.raises(ConnectivityError):
            structural_stats(graph_from_edges(4, [(0, 1), (2, 3)]))


def test_write_token_map(tmp_path):
    path = tmp_path / "tokens.tsv"
    write_token_map({"b": 1, "a": 0}, str(path))
    assert path.read_text() == "a\t0\nb\t1\n"
