import warnings

import numpy as np
import pytest

from graphite import build_graph, graphite_transform, share_homophily
from graphite.io import (
    DataFormatError,
    default_names,
    feature_node_name,
    parse_graph_dir,
    read_transformed,
    write_graph,
    write_transformed,
)
from graphite.splits import random_split
from graphite.synthetic import generate_synthetic
from graphite.transform import TransformWarning
from oracles import random_graph


def _snapshot(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


def test_fixture_parses_to_g_fig(g_fig_dir, g_fig):
    named = parse_graph_dir(g_fig_dir)
    assert named.graph == g_fig
    assert named.node_names == ["v1", "v2", "v3", "v4", "v5"]
    assert named.feature_names == ["f1", "f2", "f3"]
    assert named.class_names == ["A", "B"]
    assert named.splits is None


def test_first_seen_order_without_index_files(tmp_path):
    (tmp_path / "edges.tsv").write_text("# comment\nb\ta\n\nc\ta\n", encoding="utf-8")
    (tmp_path / "features.tsv").write_text("a\tz\nd\ty\n", encoding="utf-8")
    named = parse_graph_dir(tmp_path)
    assert named.node_names == ["b", "a", "c", "d"]
    assert named.feature_names == ["z", "y"]
    assert named.graph.num_nodes == 4 and named.graph.degrees()[3] == 0


def test_transformed_g_fig_files(g_fig_dir, tmp_path):
    named = parse_graph_dir(g_fig_dir)
    write_transformed(graphite_transform(named.graph), tmp_path, named)
    lines = (tmp_path / "x_star.tsv").read_text(encoding="utf-8").splitlines()
    assert "x3\tf1\t0.5" in lines
    assert "x2\tf3\t0.33333333333333331" in lines
    kinds = (tmp_path / "node_kinds.tsv").read_text(encoding="utf-8").splitlines()
    assert kinds[0] == "v1\tgraph_node" and kinds[-1] == "x3\tfeature_node"
    prov = (tmp_path / "feature_provenance.tsv").read_text(encoding="utf-8").splitlines()
    assert prov == ["x1\tf1", "x2\tf2", "x3\tf3"]


def test_transform_write_parse_write_is_byte_identical(g_fig_dir, tmp_path):
    named = parse_graph_dir(g_fig_dir)
    write_transformed(graphite_transform(named.graph), tmp_path / "a", named)
    tg, again = read_transformed(tmp_path / "a")
    write_transformed(tg, tmp_path / "b", again)
    assert _snapshot(tmp_path / "a") == _snapshot(tmp_path / "b")
    assert share_homophily(tg) == pytest.approx(8 / 11, abs=1e-12)


def test_read_transformed_restores_the_transform(g_fig_dir, tmp_path):
    named = parse_graph_dir(g_fig_dir)
    tg = graphite_transform(named.graph)
    write_transformed(tg, tmp_path, named)
    back, _ = read_transformed(tmp_path)
    assert back == tg


def test_no_labels_means_no_labels_file(tmp_path):
    g = build_graph(3, [(0, 1), (1, 2)], [(0, 0), (2, 0)])
    write_graph(default_names(g), tmp_path / "g")
    assert not (tmp_path / "g" / "labels.tsv").exists()
    write_transformed(graphite_transform(g), tmp_path / "t")
    assert not (tmp_path / "t" / "labels.tsv").exists()
    assert parse_graph_dir(tmp_path / "g").graph == g


@pytest.mark.parametrize("seed", range(8))
def test_parse_write_parse_round_trip(tmp_path, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n_range=(2, 30), fpn=(0, 3))
    named = default_names(g)
    named.splits = random_split(g.labels, seed=seed)
    write_graph(named, tmp_path / "a")
    first = parse_graph_dir(tmp_path / "a")
    write_graph(first, tmp_path / "b")
    second = parse_graph_dir(tmp_path / "b")
    assert first.graph == g == second.graph
    assert first.splits == named.splits == second.splits
    assert _snapshot(tmp_path / "a") == _snapshot(tmp_path / "b")


def test_generated_graph_round_trip(tmp_path):
    g = generate_synthetic(num_nodes=60, seed=1)
    write_graph(default_names(g), tmp_path)
    assert parse_graph_dir(tmp_path).graph == g


@pytest.mark.parametrize(
    "fname,content,pattern",
    [
        ("edges.tsv", "a\tb\nc\n", r"edges.tsv:2"),
        ("edges.tsv", "a\tb\tc\td\n", r"edges.tsv:1"),
        ("features.tsv", "a\tf\t0.5\n", r"features.tsv:1: binary features required"),
        ("features.tsv", "a\tf\tx\n", r"features.tsv:1: non-numeric"),
        ("labels.tsv", "zz\tA\n", r"labels.tsv:1: unknown node name 'zz'"),
        ("splits.tsv", "a\tholdout\n", r"splits.tsv:1"),
        ("splits.tsv", "q\ttrain\n", r"splits.tsv:1: unknown node name"),
    ],
)
def test_malformed_inputs_name_file_and_line(tmp_path, fname, content, pattern):
    (tmp_path / "edges.tsv").write_text("a\tb\n", encoding="utf-8")
    (tmp_path / "labels.tsv").write_text("a\tA\nb\tB\n", encoding="utf-8")
    (tmp_path / fname).write_text(content, encoding="utf-8")
    with pytest.raises(DataFormatError, match=pattern):
        parse_graph_dir(tmp_path)


def test_missing_edges_file(tmp_path):
    with pytest.raises(DataFormatError, match="missing edges.tsv"):
        parse_graph_dir(tmp_path)


def test_empty_edges_parse(tmp_path):
    (tmp_path / "edges.tsv").write_text("", encoding="utf-8")
    (tmp_path / "features.tsv").write_text("a\tf\n", encoding="utf-8")
    assert parse_graph_dir(tmp_path).graph.num_edges == 0


def test_binarize_threshold(tmp_path):
    (tmp_path / "edges.tsv").write_text("a\tb\n", encoding="utf-8")
    (tmp_path / "features.tsv").write_text("a\tf\t0.7\nb\tf\t0.2\nb\tg\t0.9\n", encoding="utf-8")
    g = parse_graph_dir(tmp_path, binarize_threshold=0.5).graph
    assert g.features.toarray().tolist() == [[1, 0], [0, 1]]


def test_split_on_unlabeled_node_rejected(tmp_path):
    (tmp_path / "edges.tsv").write_text("a\tb\n", encoding="utf-8")
    (tmp_path / "labels.tsv").write_text("a\tA\n", encoding="utf-8")
    (tmp_path / "splits.tsv").write_text("b\ttrain\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match="unlabeled"):
        parse_graph_dir(tmp_path)


def test_feature_node_names():
    assert feature_node_name("f7", set()) == "x7"
    assert feature_node_name("color", set()) == "xcolor"
    assert feature_node_name("f1", {"x1"}) == "xx1"


def test_feature_node_name_collision_in_directory(tmp_path):
    g = build_graph(3, [(0, 1)], [(0, 0), (1, 0), (2, 0)])
    named = default_names(g)
    named.node_names = ["x0", "a", "b"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TransformWarning)
        full = write_transformed(graphite_transform(g), tmp_path, named)
    assert full.node_names == ["x0", "a", "b", "xx0"]
    tg, _ = read_transformed(tmp_path)
    assert tg.num_feature_nodes == 1
