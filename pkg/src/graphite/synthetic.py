"""Synthetic heterophilic graphs with class-informative discrete features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, build_graph
from .transform import check_assumptions


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SyntheticParams:
    """Parameters of :func:`generate_synthetic`.

    Each class owns an equal, disjoint slice of the feature ids. A node draws
    ``features_per_node`` distinct features, each from its own class's slice,
    except that with probability ``feature_noise`` a draw comes from a
    uniformly chosen other class instead. Each edge joins two classes with
    probability ``p_cross``.
    """

    num_nodes: int = 500
    num_classes: int = 2
    num_features: int = 50
    features_per_node: int = 4
    avg_degree: float = 3.0
    p_cross: float = 0.95
    feature_noise: float = 0.2
    seed: int = 7
    max_attempts: int = 100

    def __post_init__(self):
        if self.num_nodes < 2 or self.num_classes < 1 or self.num_features < self.num_classes:
            raise ValueError("need >= 2 nodes, >= 1 class and at least one feature per class")
        if not 1 <= self.features_per_node <= self.num_features // self.num_classes:
            raise ValueError("features_per_node must fit inside one class feature pool")
        if not 0.0 <= self.p_cross <= 1.0 or not 0.0 <= self.feature_noise <= 1.0:
            raise ValueError("p_cross and feature_noise must be probabilities")
        if self.avg_degree < 0:
            raise ValueError("avg_degree must be non-negative")


def _draw(p: SyntheticParams, rng: np.random.Generator) -> Graph:
    n, C = p.num_nodes, p.num_classes
    labels = rng.permutation(np.arange(n) % C)
    pool = p.num_features // C
    feats = []
    for v in range(n):
        chosen: set[int] = set()
        while len(chosen) < p.features_per_node:
            c = labels[v]
            if C > 1 and rng.random() < p.feature_noise:
                c = (c + rng.integers(1, C)) % C
            chosen.add(int(c * pool + rng.integers(pool)))
        feats.extend((v, k) for k in sorted(chosen))

    members = [np.flatnonzero(labels == c) for c in range(C)]
    target = int(round(p.avg_degree * n / 2))
    edges: set[tuple[int, int]] = set()
    budget = 50 * max(target, 1)
    while len(edges) < target and budget:
        budget -= 1
        a = int(rng.integers(C))
        if C > 1 and rng.random() < p.p_cross:
            b = int((a + rng.integers(1, C)) % C)
        else:
            b = a
        u, v = int(rng.choice(members[a])), int(rng.choice(members[b]))
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return build_graph(n, sorted(edges), feats, labels, num_features=p.num_features, num_classes=C)


def generate_synthetic(params: SyntheticParams | None = None, **overrides) -> Graph:
    """Draw a graph that passes the heterophily/sparsity assumption gate.

    Redraws up to ``max_attempts`` times from one seeded generator.

    Raises
    ------
    GenerationError
        If no draw passes the gate.
    """
    if params is None:
        params = SyntheticParams(**overrides)
    elif overrides:
        params = SyntheticParams(**{**params.__dict__, **overrides})
    rng = np.random.default_rng(params.seed)
    last = []
    for _ in range(params.max_attempts):
        g = _draw(params, rng)
        last = check_assumptions(g)
        if not last:
            return g
    raise GenerationError(
        f"assumption gate failed after {params.max_attempts} attempts: {', '.join(last)}"
    )
