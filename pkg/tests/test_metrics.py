import networkx as nx
import numpy as np
import pytest

from tempgen import kernels, metrics
from tempgen.graph import StaticGraph, TemporalGraph
from tempgen.metrics import STAT_NAMES

from bruteforce import random_static_edges, reference_stats


def test_matches_enumeration_on_random_graphs():
    rng = np.random.default_rng(0)
    for _ in range(60):
        edges = random_static_edges(rng)
        got = metrics.stats(StaticGraph.from_pairs(8, edges)).values()
        assert np.allclose(got, reference_stats(edges), rtol=1e-12, atol=1e-12)


def test_matches_networkx():
    rng = np.random.default_rng(1)
    for _ in range(40):
        G = nx.gnp_random_graph(int(rng.integers(5, 25)), rng.uniform(0.05, 0.4), seed=int(rng.integers(1e9)))
        G.remove_nodes_from(list(nx.isolates(G)))
        if G.number_of_edges() == 0:
            continue
        s = metrics.stats(StaticGraph.from_pairs(100, G.edges()))
        assert s.triangle_count == sum(nx.triangles(G).values()) // 3
        assert s.num_components == nx.number_connected_components(G)
        assert s.lcc_size == max(len(c) for c in nx.connected_components(G))
        assert s.global_cf == pytest.approx(nx.transitivity(G), abs=1e-12)
        bc = nx.betweenness_centrality(G, normalized=True)
        assert s.mean_betweenness == pytest.approx(np.mean(list(bc.values())), abs=1e-12)
        cl = nx.closeness_centrality(G, wf_improved=False)
        assert s.mean_closeness == pytest.approx(np.mean(list(cl.values())), abs=1e-12)


@pytest.mark.skipif(kernels.BACKEND_NAME != "cython", reason="compiled kernels not built")
def test_backends_agree():
    rng = np.random.default_rng(2)
    for _ in range(20):
        gs = StaticGraph.from_pairs(8, random_static_edges(rng))
        assert np.array_equal(metrics.stats(gs, "python").values(), metrics.stats(gs, "cython").values())


def test_known_values():
    tri = metrics.stats(StaticGraph.from_pairs(3, [(0, 1), (1, 2), (0, 2)]))
    assert (tri.triangle_count, tri.wedge_count, tri.global_cf, tri.mean_betweenness) == (1, 3, 1.0, 0.0)
    path = metrics.stats(StaticGraph.from_pairs(3, [(0, 1), (1, 2)]))
    assert path.mean_betweenness == pytest.approx(1 / 3)
    assert path.mean_closeness == pytest.approx((2 / 3 + 1 + 2 / 3) / 3)
    assert metrics.stats(StaticGraph(3)).empty


def test_self_report_is_perfect(rand_graph):
    for mode in ("at", "upto"):
        r = metrics.error_report(rand_graph, rand_graph, mode=mode)
        assert all(v == 0 for v in r.median.values()) and r.overlap == 100.0


def test_missing_snapshot_counts_full_error():
    src = TemporalGraph.from_edges([(0, 1, 1.0), (1, 2, 2.0)], 3)
    gen = TemporalGraph.from_edges([(0, 1, 1.0)], 3)
    r = metrics.error_report(src, gen)
    assert r.snapshots[1][2].empty and r.mean["mean_degree"] == pytest.approx(0.5)
    assert r.overlap == 50.0
    assert metrics.error_report(src, gen, shared_node_ids=False).overlap == 0.0


def test_unbinned_overlap_tolerance():
    src = TemporalGraph.from_edges([(0, 1, 1.0), (1, 2, 2.0)], 3)
    gen = TemporalGraph.from_edges([(0, 1, 1.3), (1, 2, 2.6)], 3)
    assert metrics.edge_overlap(src, gen, binned=False) == 50.0


def test_report_files(tmp_path, rand_graph):
    r = metrics.error_report(rand_graph, metrics.null_generator(rand_graph, seed=1), gen_time=1.5)
    r.write_csv(tmp_path / "r.csv")
    r.write_json(tmp_path / "r.json")
    r.write_snapshots(tmp_path / "s.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "statistic,median_abs_err,mean_abs_err,std" and len(lines) == 1 + len(STAT_NAMES)
    assert '"generation_seconds": 1.5' in (tmp_path / "r.json").read_text()


def test_null_generator(rand_graph):
    g = metrics.null_generator(rand_graph, seed=0)
    assert g.num_edges == rand_graph.num_edges
    assert set(np.unique(g.t)) <= set(np.unique(rand_graph.t))
