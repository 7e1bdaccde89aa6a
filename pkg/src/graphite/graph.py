"""Immutable undirected graph with sparse binary node features."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

UNLABELED = -1


class GraphValidationError(ValueError):
    """Raised when raw records cannot form a valid graph."""


class GraphRepairWarning(UserWarning):
    """Emitted when self-loops or duplicate records are silently repaired."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph ``(V, E, X)`` with optional partial labels.

    Edges are stored once, as ``(min, max)`` rows sorted lexicographically.
    Features are a CSR pattern (``feat_indptr``/``feat_indices``); every
    stored entry is 1. ``labels[v] == -1`` marks an unlabeled node.

    Use :func:`build_graph` rather than the constructor; it canonicalizes.
    """

    num_nodes: int
    edges: np.ndarray
    feat_indptr: np.ndarray
    feat_indices: np.ndarray
    labels: np.ndarray
    num_features: int
    num_classes: int
    repairs: Mapping[str, int] = field(default_factory=dict, compare=False)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.feat_indices.shape[0])

    @property
    def has_labels(self) -> bool:
        return bool((self.labels != UNLABELED).any())

    def feature_row(self, u: int) -> np.ndarray:
        _check_node(self, u)
        return self.feat_indices[self.feat_indptr[u] : self.feat_indptr[u + 1]]

    @property
    def features(self) -> sp.csr_matrix:
        """Binary feature matrix as a fresh ``float64`` CSR matrix."""
        data = np.ones(self.nnz, dtype=np.float64)
        return sp.csr_matrix(
            (data, self.feat_indices.copy(), self.feat_indptr.copy()),
            shape=(self.num_nodes, self.num_features),
        )

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency matrix."""
        n = self.num_nodes
        if self.num_edges == 0:
            return sp.csr_matrix((n, n), dtype=np.float64)
        u, v = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        return sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.num_nodes).astype(np.int64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.num_features == other.num_features
            and self.num_classes == other.num_classes
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.feat_indptr, other.feat_indptr)
            and np.array_equal(self.feat_indices, other.feat_indices)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges}, "
            f"num_features={self.num_features}, nnz={self.nnz}, "
            f"num_classes={self.num_classes})"
        )


@dataclass(frozen=True, eq=False)
class SoftLabeledGraph:
    """A graph where some unlabeled nodes carry a class distribution.

    ``soft_nodes[i]`` has probability row ``soft_probs[i]``. A node is never
    both hard-labeled and soft-labeled.
    """

    graph: Graph
    soft_nodes: np.ndarray
    soft_probs: np.ndarray

    def __post_init__(self):
        g = self.graph
        if self.soft_probs.shape != (self.soft_nodes.size, g.num_classes):
            raise GraphValidationError("soft label matrix has the wrong shape")
        if (g.labels[self.soft_nodes] != UNLABELED).any():
            raise GraphValidationError("node carries both a hard and a soft label")
        if (self.soft_probs < 0).any():
            raise GraphValidationError("soft label rows must be non-negative")
        if self.soft_nodes.size and np.abs(self.soft_probs.sum(axis=1) - 1.0).max() > 1e-9:
            raise GraphValidationError("soft label rows must sum to 1")

    def label_matrix(self) -> np.ndarray:
        """Per-node class distribution; all-zero rows mark unlabeled nodes."""
        return label_matrix(self.graph.labels, self.graph.num_classes, self.soft_nodes, self.soft_probs)


def label_matrix(labels, num_classes, soft_nodes=None, soft_probs=None) -> np.ndarray:
    labels = np.asarray(labels)
    out = np.zeros((labels.size, num_classes), dtype=np.float64)
    hard = np.flatnonzero(labels != UNLABELED)
    out[hard, labels[hard]] = 1.0
    if soft_nodes is not None and len(soft_nodes):
        out[soft_nodes] = soft_probs
    return out


def _check_node(g: Graph, u) -> None:
    if not (0 <= int(u) < g.num_nodes):
        raise IndexError(f"node {u} out of range [0, {g.num_nodes})")


def _as_label_array(labels, num_nodes: int) -> np.ndarray:
    out = np.full(num_nodes, UNLABELED, dtype=np.int64)
    if labels is None:
        return out
    if isinstance(labels, Mapping):
        items = labels.items()
    else:
        arr = np.asarray(labels, dtype=np.int64)
        if arr.shape != (num_nodes,):
            raise GraphValidationError(f"labels must have length {num_nodes}, got {arr.shape}")
        items = ((i, c) for i, c in enumerate(arr) if c != UNLABELED)
    for node, cls in items:
        node, cls = int(node), int(cls)
        if not 0 <= node < num_nodes:
            raise GraphValidationError(f"label record ({node}, {cls}): node out of range")
        if cls < 0:
            raise GraphValidationError(f"label record ({node}, {cls}): negative class id")
        out[node] = cls
    return out


def build_graph(
    num_nodes: int,
    raw_edges: Iterable[Sequence[int]],
    raw_features: Iterable[Sequence],
    labels=None,
    *,
    num_features: Optional[int] = None,
    num_classes: Optional[int] = None,
) -> Graph:
    """Validate raw records and assemble a canonical :class:`Graph`.

    Parameters
    ----------
    num_nodes : int
        Size of the node set; node ids are ``0 .. num_nodes - 1``.
    raw_edges : iterable of (u, v)
        Undirected edges. Self-loops and duplicates are dropped with a
        :class:`GraphRepairWarning`.
    raw_features : iterable of (node, feature) or (node, feature, value)
        Sparse binary feature records. ``value`` must be 0 or 1; zero
        entries are skipped.
    labels : mapping or array, optional
        Node -> class id. Array form uses ``-1`` for unlabeled nodes.
    num_features, num_classes : int, optional
        Declared sizes; inferred as ``max id + 1`` when omitted.

    Raises
    ------
    GraphValidationError
        On any out-of-range id or non-binary feature value.
    """
    num_nodes = int(num_nodes)
    if num_nodes < 0:
        raise GraphValidationError("num_nodes must be non-negative")

    pairs = np.asarray(list(raw_edges), dtype=np.int64).reshape(-1, 2)
    bad = np.flatnonzero((pairs < 0).any(axis=1) | (pairs >= num_nodes).any(axis=1))
    if bad.size:
        u, v = pairs[bad[0]]
        raise GraphValidationError(f"edge record {bad[0]} ({u}, {v}): node out of range")
    loops = pairs[:, 0] == pairs[:, 1]
    n_loops = int(loops.sum())
    pairs = np.sort(pairs[~loops], axis=1)
    canon = np.unique(pairs, axis=0) if pairs.size else np.empty((0, 2), dtype=np.int64)
    n_dup_edges = int(pairs.shape[0] - canon.shape[0])

    feat_pairs = []
    for i, rec in enumerate(raw_features):
        if len(rec) == 3:
            node, feat, value = rec
            if value not in (0, 1):
                raise GraphValidationError(
                    f"feature record {i} ({node}, {feat}, {value}): binary features required"
                )
            if value == 0:
                continue
        elif len(rec) == 2:
            node, feat = rec
        else:
            raise GraphValidationError(f"feature record {i}: expected 2 or 3 fields")
        feat_pairs.append((int(node), int(feat)))
    fp = np.asarray(feat_pairs, dtype=np.int64).reshape(-1, 2)
    inferred_f = int(fp[:, 1].max()) + 1 if fp.size else 0
    nf = inferred_f if num_features is None else int(num_features)
    bad = np.flatnonzero((fp[:, 0] < 0) | (fp[:, 0] >= num_nodes) | (fp[:, 1] < 0) | (fp[:, 1] >= nf))
    if bad.size:
        node, feat = fp[bad[0]]
        raise GraphValidationError(f"feature record {bad[0]} ({node}, {feat}): index out of range")
    fcanon = np.unique(fp, axis=0) if fp.size else np.empty((0, 2), dtype=np.int64)
    n_dup_feats = int(fp.shape[0] - fcanon.shape[0])
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(fcanon[:, 0], minlength=num_nodes), out=indptr[1:])

    lab = _as_label_array(labels, num_nodes)
    inferred_c = int(lab.max()) + 1 if lab.size and lab.max() >= 0 else 0
    nc = inferred_c if num_classes is None else int(num_classes)
    if (lab >= nc).any():
        node = int(np.flatnonzero(lab >= nc)[0])
        raise GraphValidationError(f"label record ({node}, {lab[node]}): class out of range")

    repairs = {
        "self_loops": n_loops,
        "duplicate_edges": n_dup_edges,
        "duplicate_features": n_dup_feats,
    }
    if n_loops or n_dup_edges or n_dup_feats:
        warnings.warn(
            f"dropped {n_loops} self-loop(s), {n_dup_edges} duplicate edge(s), "
            f"{n_dup_feats} duplicate feature entr(ies)",
            GraphRepairWarning,
            stacklevel=2,
        )
    return Graph(
        num_nodes=num_nodes,
        edges=_frozen(canon),
        feat_indptr=_frozen(indptr),
        feat_indices=_frozen(fcanon[:, 1].copy()),
        labels=_frozen(lab),
        num_features=nf,
        num_classes=nc,
        repairs=repairs,
    )


def shares_feature(g: Graph, u: int, v: int) -> bool:
    """True iff nodes ``u`` and ``v`` have at least one feature in common."""
    a, b = g.feature_row(u), g.feature_row(v)
    # both rows are sorted, so a merge-style membership test suffices
    return bool(np.intersect1d(a, b, assume_unique=True).size)


def neighbors(g: Graph, u: int) -> list[int]:
    _check_node(g, u)
    e = g.edges
    out = np.concatenate([e[e[:, 0] == u, 1], e[e[:, 1] == u, 0]])
    return sorted(int(x) for x in out)


def degree(g: Graph, u: int) -> int:
    _check_node(g, u)
    return int(np.count_nonzero(g.edges == u))
