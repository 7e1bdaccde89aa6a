import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphite import (
    GraphiteTransformer,
    NaiveHomophilyBooster,
    aggregate_feature_features,
    build_graph,
    check_theorem_efficient,
    check_theorem_naive,
    graphite_transform,
    nhb_transform,
    share_homophily,
    verify_two_hop,
)
from graphite.graph import _frozen
from graphite.transform import FEATURE_NODE, TransformWarning, check_assumptions
from oracles import nhb_added_pairs, random_graph


def test_g_fig_transform(g_fig):
    tg = graphite_transform(g_fig)
    assert tg.num_feature_nodes == 3 and tg.num_feature_edges == 7
    assert tg.feature_of.tolist() == [0, 1, 2]
    rows = tg.x_star.toarray()[5:]
    np.testing.assert_allclose(rows, [[1, 0, 0.5], [0, 1, 1 / 3], [0.5, 0.5, 1]], atol=1e-12)
    np.testing.assert_array_equal(tg.x_star.toarray()[:5], g_fig.features.toarray())
    assert tg.node_kind.tolist() == [0] * 5 + [1] * 3


def test_majority_tie_rounds_to_zero(g_fig):
    rows = aggregate_feature_features(g_fig, "majority").toarray()
    assert rows[2].tolist() == [0, 0, 1]


@pytest.mark.parametrize("mode", ["averaging", "majority"])
def test_own_coordinate_is_one(mode):
    g = random_graph(np.random.default_rng(0), n_range=(20, 20))
    rows = aggregate_feature_features(g, mode).toarray()
    used = np.unique(g.feat_indices)
    assert (rows[used, used] == 1).all()


def test_single_feature_everywhere_gives_virtual_node():
    g = build_graph(4, [(0, 1)], [(v, 0) for v in range(4)])
    tg = graphite_transform(g)
    assert tg.num_feature_nodes == 1
    assert tg.base.degrees()[4] == 4
    assert tg.x_star.toarray()[4].tolist() == [1.0]


def test_singleton_feature_copies_holder_row():
    g = build_graph(3, [(0, 1)], [(0, 0), (0, 1), (1, 0), (2, 0)], num_features=2)
    tg = graphite_transform(g)
    x1 = tg.feature_node(1)
    assert tg.base.degrees()[x1] == 1
    assert tg.x_star.toarray()[x1].tolist() == g.features.toarray()[0].tolist()


def test_unused_features_dropped_with_warning():
    g = build_graph(3, [(0, 1)], [(0, 0), (1, 2)], num_features=4)
    with pytest.warns(TransformWarning, match="2 unused"):
        tg = graphite_transform(g)
    assert tg.feature_of.tolist() == [0, 2]
    assert tg.x_star.shape == (5, 4)
    with pytest.raises(KeyError):
        tg.feature_node(1)


def test_nothing_to_transform():
    with pytest.raises(ValueError, match="nothing to transform"):
        graphite_transform(build_graph(2, [(0, 1)], []))


def test_unknown_aggregator(g_fig):
    with pytest.raises(ValueError, match="unknown aggregator"):
        graphite_transform(g_fig, "median")


def test_nhb_g_fig(g_fig):
    boosted = nhb_transform(g_fig)
    added = {tuple(e) for e in boosted.edges.tolist()} - {tuple(e) for e in g_fig.edges.tolist()}
    assert added == {(0, 1), (2, 3), (2, 4), (3, 4)}
    assert boosted.num_edges == 8
    assert share_homophily(boosted) == pytest.approx(0.625, abs=1e-12)


def test_nhb_no_sharing_is_identity():
    g = build_graph(3, [(0, 1)], [(0, 0), (1, 1), (2, 2)])
    assert nhb_transform(g) == g


def test_nhb_all_sharing_completes_graph():
    n = 7
    g = build_graph(n, [(2, 5)], [(v, 0) for v in range(n)])
    assert nhb_transform(g).num_edges == n * (n - 1) // 2


def test_two_hop_g_fig_and_mutation(g_fig):
    tg = graphite_transform(g_fig)
    assert verify_two_hop(g_fig, tg)
    x1 = tg.feature_node(0)
    keep = ~((tg.base.edges[:, 0] == 0) & (tg.base.edges[:, 1] == x1))
    assert keep.sum() == tg.base.num_edges - 1
    mutated = replace(tg, base=replace(tg.base, edges=_frozen(tg.base.edges[keep])))
    assert not verify_two_hop(g_fig, mutated)


def test_theorem_checks_g_fig(g_fig):
    naive = check_theorem_naive(g_fig)
    assert naive.hom_before == 0.25 and naive.hom_after == pytest.approx(0.625, abs=1e-12)
    assert naive.edges_added == 4 and naive.passed
    eff = check_theorem_efficient(g_fig)
    assert eff.hom_after == pytest.approx(8 / 11, abs=1e-12)
    assert (eff.nodes_added, eff.edges_added) == (3, 7) and eff.passed


def test_homophilic_graph_is_gated_out():
    g = build_graph(3, [(0, 1), (1, 2)], [(0, 0), (1, 0), (2, 0)])
    rep = check_theorem_naive(g)
    assert not rep.assumptions_held
    assert any("heterophilic" in v for v in rep.violated_assumptions)
    assert rep.passed  # no homophily assertion is made
    assert not check_theorem_efficient(g).assumptions_held


def test_no_sharing_pair_is_gated_out():
    g = build_graph(3, [(0, 1)], [(0, 0), (1, 1), (2, 2)])
    assert "no non-adjacent feature-sharing pair" in check_assumptions(g)


def test_two_nodes_no_edges_is_gated_out():
    g = build_graph(2, [], [(0, 0), (1, 0)])
    assert "no edges" in check_assumptions(g)


def test_transform_is_deterministic(g_fig):
    assert graphite_transform(g_fig) == graphite_transform(g_fig)


def test_estimators_match_functions(g_fig):
    assert GraphiteTransformer().fit_transform(g_fig) == graphite_transform(g_fig)
    assert GraphiteTransformer(aggregator="majority").fit(g_fig).transform(g_fig) == graphite_transform(
        g_fig, "majority"
    )
    assert NaiveHomophilyBooster().fit_transform(g_fig) == nhb_transform(g_fig)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_transform_properties(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n_range=(3, 40), fpn=(1, 4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TransformWarning)
        tg = graphite_transform(g)
    original = {tuple(e) for e in g.edges.tolist()}
    # E is kept and every new edge is a feature edge
    assert original <= {tuple(e) for e in tg.base.edges.tolist()}
    assert tg.num_feature_edges == g.nnz
    mask = tg.is_feature_edge()
    assert (tg.node_kind[tg.base.edges[mask, 1]] == FEATURE_NODE).all()
    assert mask.sum() == g.nnz
    assert verify_two_hop(g, tg)
    boosted = nhb_transform(g)
    assert boosted.num_edges - g.num_edges == nhb_added_pairs(g)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_feature_edges_score_one(seed):
    # every feature edge (v, x_k) scores min(X[v,k], X*[x_k,k]) = 1
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n_range=(3, 30), fpn=(1, 3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TransformWarning)
        tg = graphite_transform(g)
    fe = tg.base.edges[tg.is_feature_edge()]
    assert share_homophily(tg.x_star, fe) == 1.0


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_theorem_reports_pass(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n_range=(5, 40), fpn=(0, 3))
    naive = check_theorem_naive(g)
    assert naive.passed
    if g.nnz:
        eff = check_theorem_efficient(g)
        assert eff.passed and eff.bound_satisfied
        if eff.assumptions_held:
            assert eff.hom_after > eff.hom_before
