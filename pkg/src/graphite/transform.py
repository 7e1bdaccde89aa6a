"""GRAPHITE feature-node transformation, the naive booster, and theorem checkers."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin

from .graph import UNLABELED, Graph, _frozen
from .homophily import UndefinedMetricError, share_homophily
from .validation import check_graph

GRAPH_NODE = 0
FEATURE_NODE = 1

AGGREGATORS = ("averaging", "majority")

# nnz(X) <= c * |E| in the sparsity assumption; a checker constant, not a claim
SPARSITY_CONSTANT = 8


class TransformWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class TransformedGraph:
    """Graph ``G* = (V ∪ V_X, E ∪ E_X, X*)`` produced by :func:`graphite_transform`.

    Graph nodes keep ids ``0 .. |V|-1``; the feature node of the ``r``-th used
    feature (in ascending feature-id order) has id ``|V| + r``. ``base`` holds
    the combined topology, the binary features of graph nodes (feature nodes
    have empty binary rows) and the graph-node labels. ``x_star`` is the real
    feature matrix of all ``|V*|`` nodes, ``|X|`` columns wide.
    """

    base: Graph
    node_kind: np.ndarray
    feature_of: np.ndarray
    x_star: sp.csr_matrix
    num_graph_nodes: int
    num_graph_edges: int
    aggregator: str = "averaging"
    dropped_features: int = field(default=0, compare=False)

    @property
    def num_feature_nodes(self) -> int:
        return int(self.feature_of.size)

    @property
    def num_feature_edges(self) -> int:
        return self.base.num_edges - self.num_graph_edges

    @property
    def num_nodes(self) -> int:
        return self.base.num_nodes

    def feature_node(self, k: int) -> int:
        """Node id of the feature node for feature ``k``."""
        pos = np.searchsorted(self.feature_of, k)
        if pos >= self.feature_of.size or self.feature_of[pos] != k:
            raise KeyError(f"feature {k} has no feature node")
        return self.num_graph_nodes + int(pos)

    def is_feature_edge(self) -> np.ndarray:
        """Boolean mask over ``base.edges`` marking feature edges."""
        return self.node_kind[self.base.edges[:, 1]] == FEATURE_NODE

    def __eq__(self, other):
        if not isinstance(other, TransformedGraph):
            return NotImplemented
        return (
            self.base == other.base
            and np.array_equal(self.node_kind, other.node_kind)
            and np.array_equal(self.feature_of, other.feature_of)
            and self.num_graph_edges == other.num_graph_edges
            and self.x_star.shape == other.x_star.shape
            and (self.x_star != other.x_star).nnz == 0
        )

    __hash__ = None  # type: ignore[assignment]


def aggregate_feature_features(g: Graph, mode: str = "averaging") -> sp.csr_matrix:
    """Feature rows for every feature, aggregated over the nodes holding it.

    Row ``k`` of the result is the mean (``"averaging"``) of ``X[v, :]`` over
    nodes ``v`` with ``X[v, k] = 1``, or its per-coordinate strict majority
    (``"majority"``, exactly half rounds to 0). Rows of unused features are 0.
    """
    if mode not in AGGREGATORS:
        raise ValueError(f"unknown aggregator {mode!r}; expected one of {AGGREGATORS}")
    X = g.features
    counts = X.T @ X  # counts[k, j] = #nodes holding both k and j
    counts = sp.csr_matrix(counts)
    holders = np.asarray(X.sum(axis=0)).ravel()
    if mode == "averaging":
        inv = np.divide(1.0, holders, out=np.zeros_like(holders), where=holders > 0)
        return sp.csr_matrix(sp.diags(inv) @ counts)
    coo = counts.tocoo()
    keep = 2.0 * coo.data > holders[coo.row]
    out = sp.csr_matrix(
        (np.ones(int(keep.sum())), (coo.row[keep], coo.col[keep])), shape=counts.shape
    )
    out.sort_indices()
    return out


def graphite_transform(g: Graph, aggregator: str = "averaging") -> TransformedGraph:
    """Add one feature node per used feature and link it to its holders.

    Raises
    ------
    ValueError
        If the graph has no feature occurrences ("nothing to transform").
    """
    g = check_graph(g)
    if g.nnz == 0:
        raise ValueError("nothing to transform: graph has no feature occurrences")
    n = g.num_nodes
    holders = np.bincount(g.feat_indices, minlength=g.num_features)
    used = np.flatnonzero(holders > 0)
    dropped = g.num_features - used.size
    if dropped:
        warnings.warn(f"dropped {dropped} unused feature column(s)", TransformWarning, stacklevel=2)
    rank = np.full(g.num_features, -1, dtype=np.int64)
    rank[used] = np.arange(used.size)

    owner = np.repeat(np.arange(n, dtype=np.int64), np.diff(g.feat_indptr))
    feat_edges = np.stack([owner, n + rank[g.feat_indices]], axis=1)
    # graph edges sort before feature edges because feature-node ids exceed |V|
    edges = np.concatenate([g.edges, feat_edges])
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]

    total = n + used.size
    indptr = np.concatenate([g.feat_indptr, np.full(used.size, g.feat_indptr[-1])])
    labels = np.concatenate([g.labels, np.full(used.size, UNLABELED, dtype=np.int64)])
    base = Graph(
        num_nodes=total,
        edges=_frozen(edges),
        feat_indptr=_frozen(indptr),
        feat_indices=g.feat_indices,
        labels=_frozen(labels),
        num_features=g.num_features,
        num_classes=g.num_classes,
    )
    feat_rows = aggregate_feature_features(g, aggregator)[used]
    x_star = sp.vstack([g.features, feat_rows], format="csr")
    x_star.sort_indices()
    node_kind = np.concatenate(
        [np.full(n, GRAPH_NODE, dtype=np.int8), np.full(used.size, FEATURE_NODE, dtype=np.int8)]
    )
    return TransformedGraph(
        base=base,
        node_kind=_frozen(node_kind),
        feature_of=_frozen(used.astype(np.int64)),
        x_star=x_star,
        num_graph_nodes=n,
        num_graph_edges=g.num_edges,
        aggregator=aggregator,
        dropped_features=int(dropped),
    )


def as_transformed(g: Graph) -> TransformedGraph:
    """Wrap a plain graph as a transformed graph with no feature nodes."""
    g = check_graph(g)
    return TransformedGraph(
        base=g,
        node_kind=_frozen(np.zeros(g.num_nodes, dtype=np.int8)),
        feature_of=_frozen(np.empty(0, dtype=np.int64)),
        x_star=g.features,
        num_graph_nodes=g.num_nodes,
        num_graph_edges=g.num_edges,
        aggregator="none",
    )


def _sharing_pairs(g: Graph) -> np.ndarray:
    """All ``(u, v)``, ``u < v``, with a common feature."""
    X = g.features
    co = sp.triu(X @ X.T, k=1).tocoo()
    pairs = np.stack([co.row, co.col], axis=1).astype(np.int64)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def nhb_transform(g: Graph) -> Graph:
    """Naive homophily booster: connect every non-adjacent feature-sharing pair."""
    g = check_graph(g)
    pairs = _sharing_pairs(g)
    edges = np.unique(np.concatenate([g.edges, pairs]), axis=0) if pairs.size else g.edges
    return Graph(
        num_nodes=g.num_nodes,
        edges=_frozen(edges),
        feat_indptr=g.feat_indptr,
        feat_indices=g.feat_indices,
        labels=g.labels,
        num_features=g.num_features,
        num_classes=g.num_classes,
    )


def verify_two_hop(g: Graph, tg: TransformedGraph) -> bool:
    """Check that every feature-sharing pair has a common feature-node neighbor.

    Builds the graph-node x feature-node incidence ``B`` from the feature
    edges of ``tg``; a pair ``(u, v)`` has a witness path ``u -> x -> v``
    iff ``(B B^T)[u, v] > 0``.
    """
    n = g.num_nodes
    fe = tg.base.edges[tg.is_feature_edge()]
    fe = fe[fe[:, 0] < n]
    B = sp.csr_matrix(
        (np.ones(len(fe)), (fe[:, 0], fe[:, 1] - tg.num_graph_nodes)),
        shape=(n, max(tg.num_feature_nodes, 1)),
    )
    witnessed = (B @ B.T).astype(bool).tocsr()
    pairs = _sharing_pairs(g)
    if not pairs.size:
        return True
    hits = np.asarray(witnessed[pairs[:, 0], pairs[:, 1]]).ravel()
    return bool(hits.all())


@dataclass
class TheoremReport:
    """Outcome of checking one homophily-boosting guarantee on one graph."""

    hom_before: float
    hom_after: float
    nodes_added: int
    edges_added: int
    bound_satisfied: bool
    assumptions_held: bool
    violated_assumptions: list = field(default_factory=list)

    @property
    def increased(self) -> bool:
        return self.hom_after > self.hom_before

    @property
    def passed(self) -> bool:
        if not self.bound_satisfied:
            return False
        return self.increased if self.assumptions_held else True


def check_assumptions(g: Graph) -> list:
    """Names of the heterophily/sparsity assumptions that ``g`` violates."""
    violated = []
    if g.num_edges == 0:
        violated.append("no edges")
    else:
        if share_homophily(g) >= 1.0:
            violated.append("not heterophilic: hom(G) = 1")
    adj = {(int(a), int(b)) for a, b in g.edges}
    if not any((int(a), int(b)) not in adj for a, b in _sharing_pairs(g)):
        violated.append("no non-adjacent feature-sharing pair")
    if g.num_features > g.num_nodes:
        violated.append("dense features: |X| > |V|")
    if g.nnz > SPARSITY_CONSTANT * g.num_edges:
        violated.append(f"dense features: nnz(X) > {SPARSITY_CONSTANT}|E|")
    return violated


def _hom_or_nan(g_like) -> float:
    try:
        return share_homophily(g_like)
    except UndefinedMetricError:
        return float("nan")


def check_theorem_naive(g: Graph) -> TheoremReport:
    """Check the naive booster on ``g``: homophily rises, added edges <= C(|V|, 2)."""
    g = check_graph(g)
    violated = check_assumptions(g)
    boosted = nhb_transform(g)
    n = g.num_nodes
    added = boosted.num_edges - g.num_edges
    return TheoremReport(
        hom_before=_hom_or_nan(g),
        hom_after=_hom_or_nan(boosted),
        nodes_added=0,
        edges_added=added,
        bound_satisfied=added <= n * (n - 1) // 2,
        assumptions_held=not violated,
        violated_assumptions=violated,
    )


def check_theorem_efficient(g: Graph) -> TheoremReport:
    """Check GRAPHITE on ``g``.

    Beyond the strict homophily increase, asserts the exact size identities
    ``nodes_added == #used features`` and ``edges_added == nnz(X)``.
    """
    g = check_graph(g)
    violated = check_assumptions(g)
    if g.nnz == 0:
        return TheoremReport(_hom_or_nan(g), float("nan"), 0, 0, True, False, violated + ["no features"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TransformWarning)
        tg = graphite_transform(g)
    used = int(np.unique(g.feat_indices).size)
    nodes_added = tg.num_nodes - g.num_nodes
    edges_added = tg.base.num_edges - g.num_edges
    return TheoremReport(
        hom_before=_hom_or_nan(g),
        hom_after=_hom_or_nan(tg),
        nodes_added=nodes_added,
        edges_added=edges_added,
        bound_satisfied=nodes_added == used and edges_added == g.nnz,
        assumptions_held=not violated,
        violated_assumptions=violated,
    )


class GraphiteTransformer(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`graphite_transform`.

    Parameters
    ----------
    aggregator : {"averaging", "majority"}, default="averaging"
        How feature-node features are pooled from their holders.
    """

    def __init__(self, aggregator="averaging"):
        self.aggregator = aggregator

    def fit(self, X, y=None):
        g = check_graph(X)
        if self.aggregator not in AGGREGATORS:
            raise ValueError(f"unknown aggregator {self.aggregator!r}")
        self.n_features_in_ = g.num_features
        return self

    def transform(self, X):
        g = check_graph(X)
        if hasattr(self, "n_features_in_") and g.num_features != self.n_features_in_:
            raise ValueError(
                f"graph has {g.num_features} features, transformer was fitted with {self.n_features_in_}"
            )
        return graphite_transform(g, self.aggregator)


class NaiveHomophilyBooster(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`nhb_transform`."""

    def fit(self, X, y=None):
        self.n_features_in_ = check_graph(X).num_features
        return self

    def transform(self, X):
        return nhb_transform(check_graph(X))
