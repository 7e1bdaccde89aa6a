"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .graph import Graph


def check_graph(obj) -> Graph:
    """Return ``obj`` if it is a :class:`Graph`, else raise ``TypeError``."""
    if isinstance(obj, Graph):
        return obj
    if hasattr(obj, "x_star"):
        raise TypeError("expected an untransformed Graph, got a TransformedGraph")
    raise TypeError(f"expected a Graph, got {type(obj).__name__}")


def check_transformed(obj):
    """Coerce a :class:`Graph` or transformed graph into a transformed graph.

    A plain graph becomes a transformed graph with zero feature nodes, so the
    same model code runs with and without the transformation.
    """
    from .transform import TransformedGraph, as_transformed

    if isinstance(obj, TransformedGraph):
        return obj
    return as_transformed(check_graph(obj))


def check_node_labels(y, num_nodes: int, num_classes: int | None = None) -> np.ndarray:
    """Validate a per-node label vector (``-1`` = unlabeled)."""
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != num_nodes:
        raise ValueError(f"expected {num_nodes} labels, got shape {y.shape}")
    if not np.issubdtype(y.dtype, np.integer):
        raise ValueError("labels must be integer class ids")
    if (y < -1).any():
        raise ValueError("labels must be >= -1")
    if num_classes is not None and (y >= num_classes).any():
        raise ValueError(f"label out of range for {num_classes} classes")
    return y.astype(np.int64)


def check_positive(name: str, value, *, allow_zero: bool = False) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")
    return value
