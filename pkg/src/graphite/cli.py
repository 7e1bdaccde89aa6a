"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failure.
Errors go to standard error prefixed with ``usage:``, ``data:`` or ``verify:``.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from .campaign import CampaignConfig, run_campaign, verify_graphs
from .graph import GraphValidationError, build_graph
from .gnn.model import GnnConfig
from .gnn.serialize import ModelFormatError, load, save
from .gnn.train import TrainingError, predict, train
from .homophily import UndefinedMetricError, full_report
from .io import DataFormatError, NamedGraph, parse_graph_dir, read_transformed, write_graph, write_transformed
from .splits import random_split
from .synthetic import GenerationError, SyntheticParams, generate_synthetic
from .transform import AGGREGATORS, as_transformed, graphite_transform

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _range(kind):
    def parse(text):
        lo, sep, hi = text.partition("..")
        try:
            if not sep:
                return (kind(lo), kind(lo))
            return (kind(lo), kind(hi))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None

    return parse


def _ratios(text):
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated ratios, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated ratios, got {text!r}")
    return parts


def _load_graph(path, threshold) -> NamedGraph:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return parse_graph_dir(path, threshold)


def cmd_transform(args) -> int:
    named = _load_graph(args.input, args.binarize_threshold)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tg = graphite_transform(named.graph, args.aggregator)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    write_transformed(tg, args.output, named)
    print(
        f"wrote {args.output}: {tg.num_feature_nodes} feature nodes, "
        f"{tg.num_feature_edges} feature edges"
    )
    return EXIT_OK


def cmd_metrics(args) -> int:
    if args.transformed:
        g, _ = read_transformed(args.input, args.binarize_threshold)
        num_edges = g.base.num_edges
    else:
        g = _load_graph(args.input, args.binarize_threshold).graph
        num_edges = g.num_edges
    if num_edges == 0:
        raise DataError(f"{args.input}: no edges; homophily is undefined")
    sys.stdout.write(full_report(g).to_text())
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.input:
        report = verify_graphs([_load_graph(p, args.binarize_threshold).graph for p in args.input])
    else:
        try:
            config = CampaignConfig(
                num_graphs=args.graphs,
                nodes=args.nodes,
                edge_density=args.density,
                num_features=args.features,
                features_per_node=args.features_per_node,
                num_classes=args.classes,
                force_heterophily=not args.allow_homophilic,
                seed=args.seed,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        report = run_campaign(config, bundle_dir=args.bundle_dir, workers=args.workers)
    if args.report:
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    s = report.summary
    print(
        f"graphs = {s['graphs']}\ngate_passed = {s['gate_passed']}\n"
        f"gated_out = {s['gated_out']}\nfailures = {s['failures']}"
    )
    if len(report.graphs) == 1:
        r = report.graphs[0]
        for key in ("share_before", "share_graphite", "share_nhb", "nodes_added", "edges_added", "nhb_edges_added"):
            if key in r:
                value = r[key]
                print(f"{key} = {format(value, '.17g') if isinstance(value, float) else value}")
    if not report.ok:
        failing = [r["index"] for r in report.graphs if not r["passed"]]
        where = f"; bundles in {args.bundle_dir}" if report.bundles else ""
        print(f"verify: {len(failing)} graph(s) failed: {failing[:20]}{where}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _read_config(path) -> GnnConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        return GnnConfig.from_text(text)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def cmd_train(args) -> int:
    config = _read_config(args.config)
    named = _load_graph(args.input, args.binarize_threshold)
    g = named.graph
    if not g.has_labels:
        raise DataError(f"{args.input}: training needs labels.tsv")
    if named.splits is not None and args.split_ratios is None:
        splits = named.splits
    else:
        splits = random_split(g.labels, args.split_ratios or (0.48, 0.32, 0.20), seed=args.split_seed)
    tg = graphite_transform(g, args.aggregator) if args.transform else as_transformed(g)
    report = train(tg, splits, config)
    metadata = {
        "transform": "graphite" if args.transform else "none",
        "aggregator": args.aggregator,
        "feature_names": json.dumps(named.feature_names),
        "class_names": json.dumps(named.class_names),
    }
    save(args.model, report.params, config, metadata)
    text = report.to_text()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_predict(args) -> int:
    try:
        params, config, meta = load(args.model)
    except OSError as exc:
        raise DataError(f"cannot read model {args.model}: {exc.strerror}") from exc
    feature_names = json.loads(meta.get("feature_names", "null")) or [
        f"f{k}" for k in range(params.num_features)
    ]
    class_names = json.loads(meta.get("class_names", "null")) or [f"c{c}" for c in range(params.num_classes)]
    named = _load_graph(args.input, args.binarize_threshold)
    g = named.graph
    vocab = {name: k for k, name in enumerate(feature_names)}
    unknown = sorted(set(named.feature_names[k] for k in g.feat_indices) - set(vocab))
    if unknown:
        raise DataError(f"{args.input}: features unknown to the model: {', '.join(unknown[:10])}")
    remap = np.array([vocab.get(name, -1) for name in named.feature_names], dtype=np.int64)
    records = [(v, int(remap[k])) for v in range(g.num_nodes) for k in g.feature_row(v)]
    g = build_graph(g.num_nodes, g.edges.tolist(), records, num_features=len(feature_names))
    if meta.get("transform") == "graphite":
        tg = graphite_transform(g, meta.get("aggregator", "averaging"))
    else:
        tg = as_transformed(g)
    pred = predict(params, tg, config)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        for v, c in enumerate(pred):
            fh.write(f"{named.node_names[v]}\t{class_names[int(c)]}\n")
    print(f"wrote {len(pred)} predictions to {args.output}")
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        params = SyntheticParams(
            num_nodes=args.nodes,
            num_classes=args.classes,
            num_features=args.features,
            features_per_node=args.features_per_node,
            avg_degree=args.degree,
            p_cross=args.p_cross,
            feature_noise=args.noise,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    g = generate_synthetic(params)
    named = NamedGraph(
        g,
        [f"v{i}" for i in range(g.num_nodes)],
        [f"f{k}" for k in range(g.num_features)],
        [f"c{c}" for c in range(g.num_classes)],
        random_split(g.labels, args.split_ratios, seed=args.split_seed),
    )
    write_graph(named, args.output)
    print(f"wrote {args.output}: {g.num_nodes} nodes, {g.num_edges} edges, {g.nnz} feature entries")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphite", description="Homophily boosting with feature nodes.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    def threshold(p):
        p.add_argument(
            "--binarize-threshold", type=float, default=None, metavar="T",
            help="map real feature values to 1 iff value > T (default: reject non-binary values)",
        )

    p = add("transform", cmd_transform, "add feature nodes and write the transformed graph")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--aggregator", choices=AGGREGATORS, default="averaging")
    threshold(p)

    p = add("metrics", cmd_metrics, "print homophily statistics")
    p.add_argument("input")
    p.add_argument("--transformed", action="store_true", help="input is a transformed graph directory")
    threshold(p)

    p = add("verify", cmd_verify, "run the randomized guarantee campaign")
    p.add_argument("--graphs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=_range(int), default=(10, 300), metavar="A..B")
    p.add_argument("--density", type=_range(float), default=(0.5, 3.0), metavar="A..B", help="edges per node")
    p.add_argument("--features", type=_range(int), default=(2, 40), metavar="A..B")
    p.add_argument("--features-per-node", type=_range(int), default=(0, 4), metavar="A..B")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--allow-homophilic", action="store_true", help="keep gate-failing draws and count them")
    p.add_argument("--input", action="append", help="verify this graph directory instead (repeatable)")
    p.add_argument("--report", help="write the JSON campaign report here")
    p.add_argument("--bundle-dir", default="graphite-repro", help="where failing graphs are written")
    p.add_argument("--workers", type=int, default=None, help="process count (default: GRAPHITE_WORKERS or 1)")
    threshold(p)

    p = add("train", cmd_train, "train the self-gated GNN")
    p.add_argument("input")
    p.add_argument("--config", required=True, help="flat key = value hyperparameter file")
    p.add_argument("--transform", action="store_true", help="add feature nodes before training")
    p.add_argument("--aggregator", choices=AGGREGATORS, default="averaging")
    p.add_argument("--model", default="model.graphite", help="model file to write")
    p.add_argument("--report", help="also write the training report here")
    p.add_argument("--split-ratios", type=_ratios, default=None, metavar="TR,VA,TE",
                   help="draw a random split (default: splits.tsv if present, else 0.48,0.32,0.20)")
    p.add_argument("--split-seed", type=int, default=0)
    threshold(p)

    p = add("predict", cmd_predict, "label every graph node with a trained model")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("output")
    threshold(p)

    p = add("gen", cmd_gen, "write a synthetic heterophilic graph")
    p.add_argument("output")
    defaults = SyntheticParams()
    p.add_argument("--nodes", type=int, default=defaults.num_nodes)
    p.add_argument("--classes", type=int, default=defaults.num_classes)
    p.add_argument("--features", type=int, default=defaults.num_features)
    p.add_argument("--features-per-node", type=int, default=defaults.features_per_node)
    p.add_argument("--degree", type=float, default=defaults.avg_degree)
    p.add_argument("--p-cross", type=float, default=defaults.p_cross)
    p.add_argument("--noise", type=float, default=defaults.feature_noise)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--split-ratios", type=_ratios, default=(0.48, 0.32, 0.20), metavar="TR,VA,TE")
    p.add_argument("--split-seed", type=int, default=0)
    return parser


DATA_ERRORS = (
    DataError,
    DataFormatError,
    GraphValidationError,
    ModelFormatError,
    GenerationError,
    TrainingError,
    UndefinedMetricError,
    OSError,
)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        message = f"{exc.filename}: {exc.strerror}" if isinstance(exc, OSError) and exc.filename else str(exc)
        print(f"data: {message}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"data: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
