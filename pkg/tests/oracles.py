"""Brute-force reference implementations, written without the library's code paths."""

import math
from itertools import combinations

import numpy as np

from graphite import build_graph


def feature_sets(g):
    return [set(int(k) for k in g.feature_row(v)) for v in range(g.num_nodes)]


def bitmasks(g):
    masks = []
    for v in range(g.num_nodes):
        m = 0
        for k in g.feature_row(v):
            m |= 1 << int(k)
        masks.append(m)
    return masks


def edge_list(g):
    return [(int(u), int(v)) for u, v in g.edges]


def share_hom_sets(g):
    """Fraction of edges whose endpoint feature sets intersect."""
    fs = feature_sets(g)
    edges = edge_list(g)
    return sum(1 for u, v in edges if fs[u] & fs[v]) / len(edges)


def share_hom_dense(X, edges):
    """Generalized share homophily on a dense real matrix."""
    total = 0.0
    for u, v in edges:
        total += max(min(X[u, k], X[v, k]) for k in range(X.shape[1])) if X.shape[1] else 0.0
    return total / len(edges)


def nhb_added_pairs(g):
    """Non-adjacent pairs sharing a feature, by exhaustive pair enumeration."""
    masks = bitmasks(g)
    adj = set(edge_list(g))
    count = 0
    for u, v in combinations(range(g.num_nodes), 2):
        if masks[u] & masks[v] and (u, v) not in adj:
            count += 1
    return count


def feature_hom_dense(X, edges):
    total = 0.0
    for u, v in edges:
        nu, nv = math.sqrt(float(X[u] @ X[u])), math.sqrt(float(X[v] @ X[v]))
        total += 0.0 if nu == 0 or nv == 0 else float(X[u] @ X[v]) / (nu * nv)
    return total / len(edges)


def adjusted_hom_dense(P, A):
    """Adjusted homophily from a dense adjacency ``A`` and label-distribution rows ``P``."""
    n = A.shape[0]
    two_m = A.sum()
    agree = 0.0
    for i in range(n):
        for j in range(n):
            if A[i, j]:
                agree += float(P[i] @ P[j])
    h_edge = agree / two_m
    deg = A.sum(axis=1)
    s = sum((sum(deg[v] * P[v, c] for v in range(n)) / two_m) ** 2 for c in range(P.shape[1]))
    return (h_edge - s) / (1 - s)


def random_graph(rng, n_range=(10, 60), f_range=(2, 20), fpn=(0, 4), density=(0.5, 3.0), classes=3):
    """Random simple graph with random binary features and full labels."""
    n = int(rng.integers(*n_range, endpoint=True))
    F = int(rng.integers(*f_range, endpoint=True))
    m = int(rng.uniform(*density) * n)
    edges = set()
    for _ in range(m):
        u, v = (int(x) for x in rng.integers(0, n, 2))
        if u != v:
            edges.add((min(u, v), max(u, v)))
    if not edges:
        edges.add((0, 1))
    feats = []
    for v in range(n):
        k = int(rng.integers(fpn[0], fpn[1], endpoint=True))
        for f in rng.choice(F, size=min(k, F), replace=False):
            feats.append((v, int(f)))
    labels = rng.integers(0, classes, n)
    return build_graph(n, sorted(edges), feats, labels, num_features=F, num_classes=classes)


def _gate(h_u, h_v, a, b, tau):
    return math.tanh((float(a @ np.concatenate([h_u, h_v])) + b) / tau)


def dense_aggregate(tg, H, a, b, tau, w0, w_x):
    """Explicit |V*| x |V*| gated, degree-normalized matrix times H."""
    n = tg.num_nodes
    kind = tg.node_kind
    W = np.zeros((n, n))
    for u, v in tg.base.edges:
        W[u, v] = W[v, u] = w_x if (kind[u] or kind[v]) else 1.0
    d = w0 + W.sum(axis=1)
    M = np.zeros((n, n))
    for i in range(n):
        M[i, i] = w0 * _gate(H[i], H[i], a, b, tau) / d[i]
        for j in np.flatnonzero(W[i]):
            if kind[i] != kind[j]:
                g_node, f_node = (i, j) if kind[j] else (j, i)
                alpha = _gate(H[g_node], H[f_node], a, b, tau)
            else:
                alpha = _gate(H[i], H[j], a, b, tau)
            M[i, j] = W[i, j] * alpha / math.sqrt(d[i] * d[j])
    return M @ H
