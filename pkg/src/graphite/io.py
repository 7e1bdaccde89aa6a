"""Tab-separated graph directories with external node/feature/class names.

A graph directory holds::

    edges.tsv                node<TAB>node
    features.tsv             node<TAB>feature[<TAB>value]
    labels.tsv               node<TAB>class                 (optional)
    splits.tsv               node<TAB>train|val|test        (optional)
    nodes.tsv                node                           (optional)
    feature_names.tsv        feature                        (optional)
    class_names.tsv          class                          (optional)

Names get dense ids in first-seen order. The optional index files are read
first, so writing them pins the id order and keeps isolated nodes and
unused features; :func:`write_graph` always emits them.

A transformed directory adds ``node_kinds.tsv``, ``feature_provenance.tsv``
and ``x_star.tsv`` (node, feature, value with 17 significant digits).
Lines starting with ``#`` and blank lines are ignored everywhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .graph import Graph, GraphValidationError, _frozen, build_graph
from .splits import SPLIT_NAMES, SplitSpec
from .transform import FEATURE_NODE, GRAPH_NODE, TransformedGraph

KIND_NAMES = {GRAPH_NODE: "graph_node", FEATURE_NODE: "feature_node"}


class DataFormatError(ValueError):
    """A graph directory is malformed; the message names file and line."""


@dataclass
class NamedGraph:
    """A graph plus the external names of its ids (the CLI's side table)."""

    graph: Graph
    node_names: list
    feature_names: list
    class_names: list
    splits: Optional[SplitSpec] = None
    meta: dict = field(default_factory=dict)


class _Interner:
    def __init__(self):
        self.ids: dict[str, int] = {}
        self.names: list[str] = []

    def get(self, name: str) -> int:
        i = self.ids.get(name)
        if i is None:
            i = self.ids[name] = len(self.names)
            self.names.append(name)
        return i


def _records(path: Path, width: tuple[int, ...]):
    """Yield ``(lineno, fields)`` for each data line of a TSV file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in width or any(not p for p in parts):
                raise DataFormatError(
                    f"{path.name}:{lineno}: expected {' or '.join(map(str, width))} "
                    f"tab-separated fields, got {line!r}"
                )
            yield lineno, parts


def _read_index(path: Path, interner: _Interner) -> None:
    if path.exists():
        for _, (name,) in _records(path, (1,)):
            interner.get(name)


def parse_graph_dir(path, binarize_threshold: Optional[float] = None) -> NamedGraph:
    """Read a graph directory.

    Parameters
    ----------
    binarize_threshold : float, optional
        Map a real ``value`` column to 1 iff ``value > threshold``. Without
        it, any value other than 0/1 is rejected.
    """
    root = Path(path)
    if not (root / "edges.tsv").exists():
        raise DataFormatError(f"{root}: missing edges.tsv")
    nodes, feats, classes = _Interner(), _Interner(), _Interner()
    _read_index(root / "nodes.tsv", nodes)
    _read_index(root / "feature_names.tsv", feats)
    _read_index(root / "class_names.tsv", classes)

    edges = [(nodes.get(a), nodes.get(b)) for _, (a, b) in _records(root / "edges.tsv", (2,))]
    feature_records = []
    if (root / "features.tsv").exists():
        for lineno, parts in _records(root / "features.tsv", (2, 3)):
            value = 1
            if len(parts) == 3:
                try:
                    x = float(parts[2])
                except ValueError:
                    raise DataFormatError(f"features.tsv:{lineno}: non-numeric value {parts[2]!r}") from None
                if binarize_threshold is not None:
                    value = 1 if x > binarize_threshold else 0
                elif x in (0.0, 1.0):
                    value = int(x)
                else:
                    raise DataFormatError(
                        f"features.tsv:{lineno}: binary features required (got {parts[2]}); "
                        "use a binarize threshold"
                    )
            feature_records.append((nodes.get(parts[0]), feats.get(parts[1]), value))

    def known(fname, lineno, name):
        if name not in nodes.ids:
            raise DataFormatError(f"{fname}:{lineno}: unknown node name {name!r}")
        return nodes.ids[name]

    labels = {}
    if (root / "labels.tsv").exists():
        for lineno, (node, cls) in _records(root / "labels.tsv", (2,)):
            labels[known("labels.tsv", lineno, node)] = classes.get(cls)

    split_names = None
    if (root / "splits.tsv").exists():
        split_names = {}
        for lineno, (node, which) in _records(root / "splits.tsv", (2,)):
            if which not in SPLIT_NAMES[1:]:
                raise DataFormatError(f"splits.tsv:{lineno}: split must be train, val or test, got {which!r}")
            split_names[known("splits.tsv", lineno, node)] = which

    n = len(nodes.names)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            g = build_graph(
                n,
                edges,
                feature_records,
                labels,
                num_features=len(feats.names),
                num_classes=len(classes.names),
            )
        for w in caught:
            warnings.warn(f"{root}: {w.message}", w.category, stacklevel=2)
    except GraphValidationError as exc:
        raise DataFormatError(f"{root}: {exc}") from exc

    splits = None
    if split_names is not None:
        codes = np.zeros(n, dtype=np.int8)
        for node, which in split_names.items():
            codes[node] = SPLIT_NAMES.index(which)
        splits = SplitSpec(codes)
        try:
            splits.validate(g.labels)
        except ValueError as exc:
            raise DataFormatError(f"splits.tsv: {exc}") from exc
    return NamedGraph(g, nodes.names, feats.names, classes.names, splits)


def _write_lines(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write("\t".join(row) + "\n")


def default_names(g: Graph) -> NamedGraph:
    return NamedGraph(
        g,
        [f"v{i}" for i in range(g.num_nodes)],
        [f"f{k}" for k in range(g.num_features)],
        [f"c{c}" for c in range(g.num_classes)],
    )


def write_graph(named: NamedGraph, path) -> None:
    """Write a graph directory (creating ``path``)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    g = named.graph
    nn, fn, cn = named.node_names, named.feature_names, named.class_names
    _write_lines(root / "nodes.tsv", ([nn[v]] for v in range(g.num_nodes)))
    _write_lines(root / "feature_names.tsv", ([f] for f in fn))
    _write_lines(root / "edges.tsv", ([nn[u], nn[v]] for u, v in g.edges))
    _write_lines(
        root / "features.tsv",
        ([nn[v], fn[k]] for v in range(g.num_nodes) for k in g.feature_row(v)),
    )
    for stale in ("labels.tsv", "class_names.tsv", "splits.tsv"):
        (root / stale).unlink(missing_ok=True)
    if g.has_labels or cn:
        _write_lines(root / "class_names.tsv", ([c] for c in cn))
    if g.has_labels:
        _write_lines(
            root / "labels.tsv",
            ([nn[v], cn[c]] for v, c in enumerate(g.labels) if c >= 0),
        )
    if named.splits is not None:
        a = named.splits.assignment
        _write_lines(root / "splits.tsv", ([nn[v], SPLIT_NAMES[a[v]]] for v in range(a.size) if a[v]))


def feature_node_name(feature_name: str, taken: set) -> str:
    """``f3 -> x3``; other names get an ``x`` prefix. Collisions add more ``x``."""
    stem = feature_name[1:] if feature_name.startswith("f") and len(feature_name) > 1 else feature_name
    name = "x" + stem
    while name in taken:
        name = "x" + name
    return name


def transformed_names(tg: TransformedGraph, named: NamedGraph) -> NamedGraph:
    """Extend a graph's name table to the feature nodes of ``tg``."""
    taken = set(named.node_names)
    extra = []
    for k in tg.feature_of:
        name = feature_node_name(named.feature_names[k], taken)
        taken.add(name)
        extra.append(name)
    splits = named.splits
    if splits is not None:
        codes = np.concatenate([splits.assignment, np.zeros(tg.num_feature_nodes, dtype=np.int8)])
        splits = SplitSpec(codes, splits.ratios, splits.seed)
    return NamedGraph(tg.base, list(named.node_names) + extra, named.feature_names, named.class_names, splits)


def write_transformed(tg: TransformedGraph, path, names: Optional[NamedGraph] = None) -> NamedGraph:
    """Write ``tg`` as a graph directory plus kind, provenance and ``x_star`` files.

    ``names`` is the name table of the untransformed graph (defaults to
    ``v<i>``/``f<k>``/``c<c>``). Returns the extended name table.
    """
    if names is None:
        g = tg.base
        names = NamedGraph(
            g,
            [f"v{i}" for i in range(tg.num_graph_nodes)],
            [f"f{k}" for k in range(g.num_features)],
            [f"c{c}" for c in range(g.num_classes)],
        )
    if len(names.node_names) == tg.num_nodes:
        full = names  # already extended (e.g. read back from a transformed directory)
    else:
        full = transformed_names(tg, names)
    root = Path(path)
    write_graph(full, root)
    nn, fn = full.node_names, full.feature_names
    _write_lines(root / "node_kinds.tsv", ([nn[v], KIND_NAMES[int(k)]] for v, k in enumerate(tg.node_kind)))
    _write_lines(
        root / "feature_provenance.tsv",
        ([nn[tg.num_graph_nodes + i], fn[k]] for i, k in enumerate(tg.feature_of)),
    )
    X = sp.csr_matrix(tg.x_star)
    X.sort_indices()
    rows = []
    for v in range(X.shape[0]):
        lo, hi = X.indptr[v], X.indptr[v + 1]
        for k, x in zip(X.indices[lo:hi], X.data[lo:hi]):
            if x != 0:
                rows.append([nn[v], fn[k], format(float(x), ".17g")])
    _write_lines(root / "x_star.tsv", rows)
    return full


def read_transformed(path, binarize_threshold: Optional[float] = None) -> tuple[TransformedGraph, NamedGraph]:
    """Read a directory produced by :func:`write_transformed`."""
    root = Path(path)
    named = parse_graph_dir(root, binarize_threshold)
    g = named.graph
    ids = {name: i for i, name in enumerate(named.node_names)}
    fids = {name: k for k, name in enumerate(named.feature_names)}
    for required in ("node_kinds.tsv", "feature_provenance.tsv", "x_star.tsv"):
        if not (root / required).exists():
            raise DataFormatError(f"{root}: missing {required}; not a transformed graph directory")

    kinds = np.full(g.num_nodes, -1, dtype=np.int8)
    lookup = {v: k for k, v in KIND_NAMES.items()}
    for lineno, (node, kind) in _records(root / "node_kinds.tsv", (2,)):
        if node not in ids or kind not in lookup:
            raise DataFormatError(f"node_kinds.tsv:{lineno}: bad record")
        kinds[ids[node]] = lookup[kind]
    if (kinds < 0).any():
        raise DataFormatError("node_kinds.tsv: some nodes have no kind")
    n = int((kinds == GRAPH_NODE).sum())
    if (kinds[:n] != GRAPH_NODE).any():
        raise DataFormatError("node_kinds.tsv: graph nodes must precede feature nodes")

    feature_of = np.full(g.num_nodes - n, -1, dtype=np.int64)
    for lineno, (node, feat) in _records(root / "feature_provenance.tsv", (2,)):
        if node not in ids or feat not in fids or ids[node] < n:
            raise DataFormatError(f"feature_provenance.tsv:{lineno}: bad record")
        feature_of[ids[node] - n] = fids[feat]
    if (feature_of < 0).any() or (np.diff(feature_of) <= 0).any():
        raise DataFormatError("feature_provenance.tsv: feature nodes must map to distinct features in id order")

    rows, cols, vals = [], [], []
    for lineno, (node, feat, value) in _records(root / "x_star.tsv", (3,)):
        if node not in ids or feat not in fids:
            raise DataFormatError(f"x_star.tsv:{lineno}: unknown node or feature")
        rows.append(ids[node])
        cols.append(fids[feat])
        try:
            vals.append(float(value))
        except ValueError:
            raise DataFormatError(f"x_star.tsv:{lineno}: non-numeric value {value!r}") from None
    x_star = sp.csr_matrix((vals, (rows, cols)), shape=(g.num_nodes, g.num_features))
    x_star.sort_indices()
    graph_edges = int((g.edges[:, 1] < n).sum())
    tg = TransformedGraph(
        base=g,
        node_kind=_frozen(kinds),
        feature_of=_frozen(feature_of),
        x_star=x_star,
        num_graph_nodes=n,
        num_graph_edges=graph_edges,
    )
    return tg, named
