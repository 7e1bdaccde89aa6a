"""Homophily statistics over edge sets.

Every per-edge term is accumulated with :func:`math.fsum`, which returns the
correctly rounded sum. The result therefore does not depend on edge order or
on how the edge set was partitioned for evaluation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .graph import UNLABELED, Graph, SoftLabeledGraph, label_matrix

ADJUSTED_EPS = 1e-12


class UndefinedMetricError(ValueError):
    """The metric has no value on this input (e.g. an empty edge set)."""


def _edge_array(edges) -> np.ndarray:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.shape[0] == 0:
        raise UndefinedMetricError("undefined: no edges")
    return e


def _rows(obj):
    """Feature rows of a graph-like object as CSR (real-valued if available)."""
    if hasattr(obj, "x_star"):
        return sp.csr_matrix(obj.x_star)
    if isinstance(obj, Graph):
        return obj.features
    if sp.issparse(obj):
        return sp.csr_matrix(obj, dtype=np.float64)
    return sp.csr_matrix(np.asarray(obj, dtype=np.float64))


def _edges_of(obj):
    if hasattr(obj, "base"):
        return obj.base.edges
    return obj.edges


def feature_homophily(features, edges) -> float:
    """Mean cosine similarity of feature rows across edges.

    A zero row has cosine 0 with anything.
    """
    e = _edge_array(edges)
    X = _rows(features)
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    dots = np.asarray(X[e[:, 0]].multiply(X[e[:, 1]]).sum(axis=1)).ravel()
    denom = norms[e[:, 0]] * norms[e[:, 1]]
    cos = np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)
    return math.fsum(cos) / e.shape[0]


def _labels_as_matrix(labels, num_classes: Optional[int] = None) -> np.ndarray:
    if isinstance(labels, SoftLabeledGraph):
        return labels.label_matrix()
    if isinstance(labels, Graph):
        return label_matrix(labels.labels, labels.num_classes)
    arr = np.asarray(labels)
    if arr.ndim == 2:
        return arr.astype(np.float64)
    arr = arr.astype(np.int64)
    c = num_classes if num_classes is not None else int(arr.max(initial=-1)) + 1
    return label_matrix(arr, c)


def _edge_agreement(P: np.ndarray, e: np.ndarray) -> np.ndarray:
    has = P.sum(axis=1) > 0
    missing = np.flatnonzero(~has[e[:, 0]] | ~has[e[:, 1]])
    if missing.size:
        i = missing[0]
        u = e[i, 0] if not has[e[i, 0]] else e[i, 1]
        raise ValueError(f"missing label for node {u}")
    # one-hot . one-hot is the indicator; one-hot . p reads p[c]
    return np.einsum("ij,ij->i", P[e[:, 0]], P[e[:, 1]])


def edge_homophily(labels, edges, num_classes: Optional[int] = None) -> float:
    """Mean label agreement across edges.

    ``labels`` is an int array (``-1`` = unlabeled), a per-node probability
    matrix, a :class:`Graph`, or a :class:`SoftLabeledGraph`. Hard/hard pairs
    score the indicator, hard/soft pairs the soft mass on the hard class, and
    soft/soft pairs the expected agreement ``sum_c p[c] q[c]``.
    """
    e = _edge_array(edges)
    P = _labels_as_matrix(labels, num_classes)
    return math.fsum(_edge_agreement(P, e)) / e.shape[0]


def adjusted_homophily(labels, edges, degrees=None, num_classes: Optional[int] = None) -> float:
    """Edge homophily corrected for class degree mass.

    ``(h_edge - S) / (1 - S)`` with ``S = sum_c D_c^2 / (2|E|)^2`` and
    ``D_c`` the total degree of class-``c`` nodes; a soft-labeled node adds
    ``deg(v) * p[c]`` to each ``D_c``.

    Raises
    ------
    UndefinedMetricError
        If ``1 - S < 1e-12`` or the edge set is empty.
    """
    e = _edge_array(edges)
    P = _labels_as_matrix(labels, num_classes)
    h_edge = math.fsum(_edge_agreement(P, e)) / e.shape[0]
    if degrees is None:
        degrees = np.bincount(e.ravel(), minlength=P.shape[0])
    deg = np.asarray(degrees, dtype=np.float64)
    two_m = 2.0 * e.shape[0]
    D = np.array([math.fsum(deg * P[:, c]) for c in range(P.shape[1])])
    s = math.fsum((D / two_m) ** 2)
    denom = 1.0 - s
    if denom < ADJUSTED_EPS:
        raise UndefinedMetricError("undefined: degenerate class degree distribution")
    return (h_edge - s) / denom


def share_homophily(g, edges=None) -> float:
    """Mean over edges of ``max_k min(X[u, k], X[v, k])``.

    On binary rows this is the fraction of edges whose endpoints share a
    feature. ``g`` may be a :class:`Graph`, a transformed graph (its real
    ``x_star`` rows are used) or a bare feature matrix with ``edges``.
    """
    X = _rows(g)
    e = _edge_array(_edges_of(g) if edges is None else edges)
    # rows are non-negative, so the sparse elementwise minimum is exact
    m = X[e[:, 0]].minimum(X[e[:, 1]])
    terms = np.asarray(m.max(axis=1).todense()).ravel()
    return math.fsum(terms) / e.shape[0]


def assign_soft_labels(tg) -> SoftLabeledGraph:
    """Give each feature node the label distribution of its graph-node neighbours."""
    base = tg.base
    n = tg.num_graph_nodes
    if (base.labels[:n] == UNLABELED).any():
        u = int(np.flatnonzero(base.labels[:n] == UNLABELED)[0])
        raise ValueError(f"missing label for node {u}")
    fe = base.edges[tg.is_feature_edge()]
    C = base.num_classes
    counts = np.zeros((tg.num_feature_nodes, C))
    np.add.at(counts, (fe[:, 1] - n, base.labels[fe[:, 0]]), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    assert (totals > 0).all(), "feature node without neighbours"
    soft_nodes = np.arange(n, n + tg.num_feature_nodes, dtype=np.int64)
    return SoftLabeledGraph(base, soft_nodes, counts / totals)


@dataclass
class HomophilyReport:
    """All homophily statistics for one graph; ``None`` marks an undefined value."""

    feature_hom: Optional[float]
    edge_hom: Optional[float]
    adjusted_hom: Optional[float]
    share_hom: Optional[float]
    num_edges: int
    num_nodes: int
    num_features: int

    def to_text(self) -> str:
        lines = []
        for key, value in asdict(self).items():
            if value is None:
                text = "undefined"
            elif isinstance(value, float):
                text = format(value, ".17g")
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HomophilyReport":
        values = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, raw = line.partition("=")
            key, raw = key.strip(), raw.strip()
            if key.startswith("num_"):
                values[key] = int(raw)
            else:
                values[key] = None if raw == "undefined" else float(raw)
        return cls(**values)


def _maybe(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (UndefinedMetricError, ValueError):
        return None


def full_report(g) -> HomophilyReport:
    """Compute every metric, tolerating undefined members.

    For a transformed graph, feature nodes get soft labels before the
    label-based metrics, and all edges of the transformed graph count.
    """
    if hasattr(g, "x_star"):
        base = g.base
        labels = _maybe(assign_soft_labels, g)
        num_features = base.num_features
    else:
        base = g
        labels = g if g.has_labels else None
        num_features = g.num_features
    edges = base.edges
    edge_h = adj_h = None
    if labels is not None:
        edge_h = _maybe(edge_homophily, labels, edges)
        adj_h = _maybe(adjusted_homophily, labels, edges, base.degrees())
    return HomophilyReport(
        feature_hom=_maybe(feature_homophily, g, edges),
        edge_hom=edge_h,
        adjusted_hom=adj_h,
        share_hom=_maybe(share_homophily, g),
        num_edges=base.num_edges,
        num_nodes=base.num_nodes,
        num_features=num_features,
    )
