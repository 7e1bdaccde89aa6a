"""Graph homophily boosting with feature nodes, homophily metrics, and a self-gated GNN."""

from .graph import (
    Graph,
    GraphRepairWarning,
    GraphValidationError,
    SoftLabeledGraph,
    build_graph,
    degree,
    neighbors,
    shares_feature,
)
from .homophily import (
    HomophilyReport,
    UndefinedMetricError,
    adjusted_homophily,
    assign_soft_labels,
    edge_homophily,
    feature_homophily,
    full_report,
    share_homophily,
)
from .transform import (
    GraphiteTransformer,
    NaiveHomophilyBooster,
    TheoremReport,
    TransformedGraph,
    aggregate_feature_features,
    as_transformed,
    check_theorem_efficient,
    check_theorem_naive,
    graphite_transform,
    nhb_transform,
    verify_two_hop,
)

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "GraphRepairWarning",
    "GraphValidationError",
    "GraphiteTransformer",
    "HomophilyReport",
    "NaiveHomophilyBooster",
    "SoftLabeledGraph",
    "TheoremReport",
    "TransformedGraph",
    "UndefinedMetricError",
    "adjusted_homophily",
    "aggregate_feature_features",
    "as_transformed",
    "assign_soft_labels",
    "build_graph",
    "check_theorem_efficient",
    "check_theorem_naive",
    "degree",
    "edge_homophily",
    "feature_homophily",
    "full_report",
    "graphite_transform",
    "neighbors",
    "nhb_transform",
    "share_homophily",
    "shares_feature",
    "verify_two_hop",
]
