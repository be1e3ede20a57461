import numpy as np
import pytest

from tempgen.graph import (EdgeListError, StaticGraph, TemporalGraph, format_time, iter_snapshots,
                           load_edge_list, save_edge_list, snapshot, static_projection)


def test_edges_sorted_by_time_and_csr(small_graph):
    g = small_graph
    assert np.all(np.diff(g.t) >= 0)
    for v in range(g.num_nodes):
        adj = g.adjacency(v)
        assert [t for _, t in adj] == sorted(t for _, t in adj)
    assert g.degree().sum() == 2 * g.num_edges


@pytest.mark.parametrize("rows", [[(0, 0, 1.0)], [(0, 1, -1.0)], [(0, 1, 1.0), (1, 0, 1.0)]])
def test_invalid_edges_rejected(rows):
    with pytest.raises(ValueError):
        TemporalGraph.from_edges(rows)


def test_load_edge_list(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("# header\na,b,1\nb,c,2.5\n\nc,c,3\nb,a,1\n")
    g = load_edge_list(p)
    assert g.num_nodes == 3 and g.num_edges == 2
    assert g.labels == ["a", "b", "c"]
    assert g.skipped_self_loops == 1 and g.dropped_duplicates == 1
    with pytest.raises(EdgeListError):
        load_edge_list(p, dedupe=False)


@pytest.mark.parametrize("text", ["a,b\n", "a,b,x\n", "a,b,-1\n", "", "a,b,nan\n"])
def test_load_edge_list_errors(tmp_path, text):
    p = tmp_path / "e.csv"
    p.write_text(text)
    with pytest.raises(EdgeListError):
        load_edge_list(p)


def test_round_trip(tmp_path, small_graph):
    p = tmp_path / "g.csv"
    save_edge_list(small_graph, p, use_labels=False)
    g = load_edge_list(p)
    assert g.num_edges == small_graph.num_edges
    assert format_time(3.0) == "3" and format_time(0.1) == "0.1"


def test_snapshots(small_graph):
    at = dict(iter_snapshots(small_graph, "at"))
    upto = dict(iter_snapshots(small_graph, "upto"))
    assert at[3.0].edges == frozenset({(0, 2), (2, 3)})
    assert len(upto[6.0]) == len(static_projection(small_graph))
    assert snapshot(small_graph, 3.0).edges == at[3.0].edges
    with pytest.raises(KeyError):
        snapshot(small_graph, 2.5)


def test_static_graph():
    s = StaticGraph.from_pairs(6, [(3, 1), (1, 3), (4, 5)])
    assert s.edges == frozenset({(1, 3), (4, 5)})
    assert s.nodes().tolist() == [1, 3, 4, 5]
