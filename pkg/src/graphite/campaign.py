"""Randomized verification campaign for the homophily-boosting guarantees.

Each graph gets its own child of ``SeedSequence(seed)``, so graph ``i`` is
the same no matter how many graphs are drawn or how many workers run. The
deterministic part of a report (everything but wall-clock timings) depends
only on the configuration.
"""

from __future__ import annotations

import json
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Optional

import numpy as np

from .graph import Graph, build_graph
from .transform import (
    TransformWarning,
    check_assumptions,
    check_theorem_efficient,
    check_theorem_naive,
    graphite_transform,
    nhb_transform,
    verify_two_hop,
)

WORKERS_ENV = "GRAPHITE_WORKERS"


def _check_range(name, r, lo, integer=True):
    a, b = r
    if a > b or a < lo:
        raise ValueError(f"{name} range must satisfy {lo} <= low <= high, got {r}")
    return (int(a), int(b)) if integer else (float(a), float(b))


@dataclass(frozen=True)
class CampaignConfig:
    """What to draw and how many.

    ``edge_density`` is in edges per node. Feature counts are capped at the
    node count. With ``force_heterophily`` each graph is redrawn (up to
    ``max_attempts`` times) until it passes the assumption gate; otherwise
    failing draws are kept, counted as gated out, and only get the checks
    that hold on every graph.
    """

    num_graphs: int = 1000
    nodes: tuple = (10, 300)
    edge_density: tuple = (0.5, 3.0)
    num_features: tuple = (2, 40)
    features_per_node: tuple = (0, 4)
    num_classes: int = 3
    force_heterophily: bool = True
    max_attempts: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.num_graphs < 1 or self.max_attempts < 1 or self.num_classes < 1:
            raise ValueError("num_graphs, max_attempts and num_classes must be positive")
        object.__setattr__(self, "nodes", _check_range("nodes", self.nodes, 2))
        object.__setattr__(self, "edge_density", _check_range("edge_density", self.edge_density, 0, False))
        object.__setattr__(self, "num_features", _check_range("num_features", self.num_features, 1))
        object.__setattr__(
            self, "features_per_node", _check_range("features_per_node", self.features_per_node, 0)
        )


def draw_graph(config: CampaignConfig, rng: np.random.Generator) -> Graph:
    """One random simple graph with random binary features and labels."""
    n = int(rng.integers(config.nodes[0], config.nodes[1], endpoint=True))
    F = min(int(rng.integers(config.num_features[0], config.num_features[1], endpoint=True)), n)
    m = max(1, int(round(rng.uniform(*config.edge_density) * n)))
    m = min(m, n * (n - 1) // 2)
    u = rng.integers(0, n, 2 * m)
    v = rng.integers(0, n, 2 * m)
    keep = u != v
    pairs = np.unique(np.sort(np.stack([u[keep], v[keep]], axis=1), axis=1), axis=0)
    pairs = pairs[rng.permutation(len(pairs))[:m]]
    counts = rng.integers(config.features_per_node[0], config.features_per_node[1], n, endpoint=True)
    feats = [(i, int(k)) for i in range(n) for k in rng.choice(F, size=min(int(counts[i]), F), replace=False)]
    labels = rng.integers(0, config.num_classes, n)
    return build_graph(n, pairs.tolist(), feats, labels, num_features=F, num_classes=config.num_classes)


# --- brute-force oracles, deliberately independent of the library's sparse paths


def oracle_nhb_edges(g: Graph) -> int:
    """Non-adjacent feature-sharing pairs, by enumerating all node pairs on bitmasks."""
    masks = []
    for v in range(g.num_nodes):
        m = 0
        for k in g.feature_row(v):
            m |= 1 << int(k)
        masks.append(m)
    adj = {(int(a), int(b)) for a, b in g.edges}
    return sum(1 for a, b in combinations(range(g.num_nodes), 2) if masks[a] & masks[b] and (a, b) not in adj)


def oracle_share(X: np.ndarray, edges: np.ndarray) -> float:
    """Dense share homophily: mean over edges of max_k min(X[u,k], X[v,k])."""
    if len(edges) == 0:
        return float("nan")
    vals = np.minimum(X[edges[:, 0]], X[edges[:, 1]]).max(axis=1, initial=0.0)
    return float(vals.sum()) / len(edges)


def _close(a: float, b: float, tol: float = 1e-12) -> bool:
    return (np.isnan(a) and np.isnan(b)) or abs(a - b) <= tol


def verify_graph(g: Graph) -> tuple[dict, dict]:
    """Run every check on one graph; return ``(record, timings)``."""
    timings = {}
    violated = check_assumptions(g)
    gated = not violated
    record = {
        "num_nodes": g.num_nodes,
        "num_edges": g.num_edges,
        "num_features": g.num_features,
        "nnz": g.nnz,
        "gate_passed": gated,
        "violated_assumptions": violated,
    }
    checks = {}

    t0 = time.perf_counter()
    naive = check_theorem_naive(g)
    timings["naive_check"] = time.perf_counter() - t0
    oracle_added = oracle_nhb_edges(g)
    checks["nhb_edge_bound"] = naive.bound_satisfied
    checks["nhb_oracle_count"] = naive.edges_added == oracle_added
    if gated:
        checks["nhb_increase"] = naive.increased

    has_features = g.nnz > 0
    if has_features:
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TransformWarning)
            tg = graphite_transform(g)
        timings["transform"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        eff = check_theorem_efficient(g)
        timings["efficient_check"] = time.perf_counter() - t0
        checks["graphite_size_identities"] = eff.bound_satisfied
        if gated:
            checks["graphite_increase"] = eff.increased
        checks["two_hop_witness"] = verify_two_hop(g, tg)

        t0 = time.perf_counter()
        dense = tg.x_star.toarray()
        before = oracle_share(g.features.toarray(), g.edges)
        after = oracle_share(dense, tg.base.edges)
        boosted = nhb_transform(g)
        after_nhb = oracle_share(g.features.toarray(), boosted.edges)
        timings["oracles"] = time.perf_counter() - t0
        checks["share_oracle"] = (
            _close(before, naive.hom_before) and _close(after, eff.hom_after) and _close(after_nhb, naive.hom_after)
        )
        record.update(
            share_before=naive.hom_before,
            share_graphite=eff.hom_after,
            share_nhb=naive.hom_after,
            nodes_added=eff.nodes_added,
            edges_added=eff.edges_added,
        )
    else:
        record.update(share_before=naive.hom_before, share_nhb=naive.hom_after)
    record["nhb_edges_added"] = naive.edges_added
    record["oracle_nhb_edges"] = oracle_added
    record["checks"] = checks
    record["failed_checks"] = [name for name, ok in checks.items() if not ok]
    record["passed"] = not record["failed_checks"]
    return record, timings


def _draw_for(config: CampaignConfig, seed_seq: np.random.SeedSequence) -> tuple[Graph, int]:
    rng = np.random.default_rng(seed_seq)
    g = None
    for attempt in range(1, config.max_attempts + 1):
        g = draw_graph(config, rng)
        if not config.force_heterophily or not check_assumptions(g):
            return g, attempt
    return g, config.max_attempts


def _run_one(args):
    config, index, seed_seq = args
    g, attempts = _draw_for(config, seed_seq)
    record, timings = verify_graph(g)
    record = {"index": index, "attempts": attempts, **record}
    return record, timings, (g if not record["passed"] else None)


def _json_float(x):
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


@dataclass
class CampaignReport:
    config: dict
    graphs: list
    timings: list = field(default_factory=list)
    bundles: list = field(default_factory=list)

    @property
    def summary(self) -> dict:
        gated = [r for r in self.graphs if r["gate_passed"]]
        return {
            "graphs": len(self.graphs),
            "gate_passed": len(gated),
            "gated_out": len(self.graphs) - len(gated),
            "failures": sum(1 for r in self.graphs if not r["passed"]),
            "failures_on_gate_passed": sum(1 for r in gated if not r["passed"]),
        }

    @property
    def ok(self) -> bool:
        return self.summary["failures"] == 0

    def deterministic_dict(self) -> dict:
        """The report without timings or bundle paths; fixed given the config."""
        return {"config": self.config, "summary": self.summary, "graphs": self.graphs}

    def to_json(self, include_timings: bool = True) -> str:
        data = self.deterministic_dict()
        if include_timings:
            data["timings"] = self.timings
            data["total_seconds"] = {
                key: sum(t.get(key, 0.0) for t in self.timings)
                for key in ("transform", "efficient_check", "naive_check", "oracles")
            }
        data["bundles"] = self.bundles
        cleaned = json.loads(json.dumps(data, default=_json_float), parse_constant=lambda _: None)
        return json.dumps(cleaned, indent=2, sort_keys=False) + "\n"


def write_bundle(g: Graph, directory, info: dict) -> Path:
    """Write a failing graph plus the seed information needed to redraw it."""
    from .io import default_names, write_graph

    root = Path(directory)
    write_graph(default_names(g), root)
    (root / "seed.json").write_text(json.dumps(info, indent=2) + "\n", encoding="utf-8")
    return root


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def run_campaign(
    config: CampaignConfig,
    *,
    bundle_dir=None,
    workers: Optional[int] = None,
) -> CampaignReport:
    """Draw ``config.num_graphs`` graphs and check every guarantee on each.

    Parameters
    ----------
    bundle_dir : path, optional
        Where to write a reproduction bundle for each failing graph.
    workers : int, optional
        Process count; defaults to the ``GRAPHITE_WORKERS`` variable (1).
        Results are collected in graph-index order either way.
    """
    workers = worker_count() if workers is None else workers
    children = np.random.SeedSequence(config.seed).spawn(config.num_graphs)
    jobs = [(config, i, s) for i, s in enumerate(children)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_one(job) for job in jobs]
    report = CampaignReport(config=asdict(config), graphs=[], timings=[])
    for record, timings, failing in results:
        report.graphs.append(record)
        report.timings.append(timings)
        if failing is not None and bundle_dir is not None:
            index = record["index"]
            path = write_bundle(
                failing,
                Path(bundle_dir) / f"graph_{index:05d}",
                {"campaign_seed": config.seed, "graph_index": index, "config": asdict(config),
                 "failed_checks": record["failed_checks"]},
            )
            report.bundles.append(str(path))
    return report


def verify_graphs(graphs: list) -> CampaignReport:
    """Campaign over explicitly supplied graphs (e.g. a fixture directory)."""
    report = CampaignReport(config={"explicit_graphs": len(graphs)}, graphs=[], timings=[])
    for i, g in enumerate(graphs):
        record, timings = verify_graph(g)
        report.graphs.append({"index": i, "attempts": 1, **record})
        report.timings.append(timings)
    return report
