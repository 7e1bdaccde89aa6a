import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphite import (
    GraphRepairWarning,
    GraphValidationError,
    build_graph,
    degree,
    neighbors,
    shares_feature,
)


def test_self_loop_and_duplicate_are_repaired():
    with pytest.warns(GraphRepairWarning):
        g = build_graph(2, [(0, 1), (1, 0), (0, 0)], [])
    assert g.edges.tolist() == [[0, 1]]
    assert g.repairs["self_loops"] == 1
    assert g.repairs["duplicate_edges"] == 1


def test_g_fig_counts(g_fig):
    assert g_fig.num_edges == 4
    assert g_fig.nnz == 7
    assert g_fig.num_features == 3
    assert g_fig.num_classes == 2


def test_out_of_range_edge_names_record():
    with pytest.raises(GraphValidationError, match=r"edge record 1 \(0, 7\)"):
        build_graph(3, [(0, 1), (0, 7)], [])


def test_out_of_range_feature():
    with pytest.raises(GraphValidationError, match="feature record 0"):
        build_graph(3, [(0, 1)], [(5, 0)])


@pytest.mark.parametrize("value", [0.5, 2, -1])
def test_non_binary_feature_rejected(value):
    with pytest.raises(GraphValidationError, match="binary features required"):
        build_graph(2, [(0, 1)], [(0, 0, value)])


def test_zero_valued_feature_is_skipped():
    g = build_graph(2, [(0, 1)], [(0, 0, 0), (1, 0, 1)])
    assert g.nnz == 1


def test_graph_is_immutable(g_fig):
    with pytest.raises(ValueError):
        g_fig.edges[0, 0] = 3
    with pytest.raises(AttributeError):
        g_fig.num_nodes = 9


def test_shares_feature(g_fig):
    assert shares_feature(g_fig, 0, 1)
    assert not shares_feature(g_fig, 0, 2)
    assert shares_feature(g_fig, 4, 4)


def test_neighbors_and_degree(g_fig):
    assert neighbors(g_fig, 1) == [3, 4]
    assert degree(g_fig, 1) == 2
    iso = build_graph(3, [(0, 1)], [])
    assert neighbors(iso, 2) == [] and degree(iso, 2) == 0
    path = build_graph(3, [(0, 1), (1, 2)], [])
    assert degree(path, 1) == 2


def test_isolated_nodes_admitted():
    g = build_graph(4, [(0, 1)], [(3, 0)])
    assert g.num_nodes == 4 and g.degrees().tolist() == [1, 1, 0, 0]


def test_labels_as_array_with_unlabeled():
    g = build_graph(3, [(0, 1)], [], labels=[1, -1, 0])
    assert g.labels.tolist() == [1, -1, 0]
    assert g.num_classes == 2


graphs = st.integers(2, 25).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=60),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, 7)), max_size=60),
    )
)


@settings(max_examples=150, deadline=None)
@given(graphs)
def test_canonical_invariants(data):
    n, edges, feats = data
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GraphRepairWarning)
        g = build_graph(n, edges, feats, num_features=8)
    e = g.edges
    assert (e[:, 0] < e[:, 1]).all()
    assert len({tuple(r) for r in e.tolist()}) == g.num_edges
    assert sorted(map(tuple, e.tolist())) == list(map(tuple, e.tolist()))
    for v in range(n):
        row = g.feature_row(v)
        assert (np.diff(row) > 0).all()
    assert g.degrees().sum() == 2 * g.num_edges
    for u in range(n):
        for v in range(n):
            assert shares_feature(g, u, v) == shares_feature(g, v, u)
    again = build_graph(n, g.edges.tolist(), [(v, int(k)) for v in range(n) for k in g.feature_row(v)], num_features=8)
    assert again == g

