"""Self-gated, degree-normalized message passing over graph and feature nodes."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

import numpy as np
from scipy.special import ndtr

from ..validation import check_positive, check_transformed
from . import autodiff as ad

FEATURE_MODES = ("original", "zeros", "normalized")
METRICS = ("accuracy", "roc_auc")


@dataclass(frozen=True)
class GnnConfig:
    """Architecture and training hyperparameters.

    Graph edges have weight 1; ``w_x`` weighs feature edges and ``w0`` the
    self-loops. ``tau`` is the gate temperature.
    """

    num_layers: int = 2
    hidden_dim: int = 32
    w0: float = 1.0
    w_x: float = 0.6
    tau: float = 1.0
    dropout: float = 0.2
    learning_rate: float = 0.01
    steps: int = 200
    seed: int = 0
    feature_mode: str = "original"
    metric: str = "accuracy"
    eval_every: int = 10

    def __post_init__(self):
        if int(self.num_layers) < 0 or int(self.hidden_dim) < 1:
            raise ValueError("num_layers must be >= 0 and hidden_dim >= 1")
        check_positive("w0", self.w0)
        # zero is admitted so tests can switch feature edges off
        check_positive("w_x", self.w_x, allow_zero=True)
        check_positive("tau", self.tau)
        check_positive("learning_rate", self.learning_rate)
        if not 0.0 <= float(self.dropout) < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        if int(self.steps) < 0 or int(self.eval_every) < 1:
            raise ValueError("steps must be >= 0 and eval_every >= 1")
        if self.feature_mode not in FEATURE_MODES:
            raise ValueError(f"feature_mode must be one of {FEATURE_MODES}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")

    @classmethod
    def from_text(cls, text: str) -> "GnnConfig":
        """Parse a flat ``key = value`` file; ``#`` starts a comment."""
        types = {f.name: f.type for f in fields(cls)}
        aliases = {"wX": "w_x", "lr": "learning_rate"}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = aliases.get(key.strip(), key.strip()), value.strip()
            if not sep or key not in types:
                raise ValueError(f"config line {lineno}: unrecognized entry {raw!r}")
            kind = types[key]
            if kind == "int":
                values[key] = int(value)
            elif kind == "float":
                values[key] = float(value)
            else:
                values[key] = value
        return cls(**values)

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(f"{f.name} = {format(v, '.17g') if isinstance(v, float) else v}")
        return "\n".join(out) + "\n"


class ModelParams:
    """Named float64 parameter arrays, kept in declaration order.

    Names: ``in_weight``, ``in_bias``; per layer ``l``: ``gate_a.l``,
    ``gate_b.l``, ``mlp_w1.l``, ``mlp_b1.l``, ``mlp_w2.l``, ``mlp_b2.l``;
    then ``head_weight``, ``head_bias``.
    """

    def __init__(self, arrays: dict):
        self.arrays = {k: np.asarray(v, dtype=np.float64) for k, v in arrays.items()}

    @staticmethod
    def layout(num_features: int, num_classes: int, config: GnnConfig) -> list:
        h = config.hidden_dim
        spec = [("in_weight", (num_features, h)), ("in_bias", (h,))]
        for layer in range(config.num_layers):
            spec += [
                (f"gate_a.{layer}", (2 * h,)),
                (f"gate_b.{layer}", ()),
                (f"mlp_w1.{layer}", (h, h)),
                (f"mlp_b1.{layer}", (h,)),
                (f"mlp_w2.{layer}", (h, h)),
                (f"mlp_b2.{layer}", (h,)),
            ]
        spec += [("head_weight", (h, num_classes)), ("head_bias", (num_classes,))]
        return spec

    @classmethod
    def init(cls, num_features: int, num_classes: int, config: GnnConfig, rng) -> "ModelParams":
        """Affine weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.

        Gate vectors start at zero and gate biases at ``tau``, so every gate
        opens at ``tanh(1)``. An all-zero gate would zero every layer output
        and with it every gradient below the head.
        """
        arrays = {}
        for name, shape in cls.layout(num_features, num_classes, config):
            if len(shape) == 2:
                bound = 1.0 / np.sqrt(max(shape[0], 1))
                arrays[name] = rng.uniform(-bound, bound, size=shape)
            elif name.startswith("gate_b"):
                arrays[name] = np.full(shape, float(config.tau))
            else:
                arrays[name] = np.zeros(shape)
        return cls(arrays)

    def __getitem__(self, name):
        return self.arrays[name]

    def names(self):
        return list(self.arrays)

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self.arrays.items()})

    def check_shapes(self, num_features: int, num_classes: int, config: GnnConfig) -> None:
        expected = self.layout(num_features, num_classes, config)
        if [n for n, _ in expected] != self.names():
            raise ValueError("parameter names do not match the configuration")
        for name, shape in expected:
            if self.arrays[name].shape != shape:
                raise ValueError(f"parameter {name} has shape {self.arrays[name].shape}, expected {shape}")

    @property
    def num_classes(self) -> int:
        return self.arrays["head_bias"].shape[0]

    @property
    def num_features(self) -> int:
        return self.arrays["in_weight"].shape[0]


def weighted_degrees(tg, w0: float, w_x: float) -> np.ndarray:
    """Weighted degree of every node: ``w0`` + 1 per graph edge + ``w_x`` per feature edge."""
    tg = check_transformed(tg)
    e = tg.base.edges
    w = np.where(tg.is_feature_edge(), float(w_x), 1.0)
    d = np.full(tg.num_nodes, float(w0))
    np.add.at(d, e[:, 0], w)
    np.add.at(d, e[:, 1], w)
    return d


def gate(h_u, h_v, a, b, tau) -> float:
    """Self-gating score ``tanh((a . [h_u, h_v] + b) / tau)``."""
    z = np.concatenate([np.asarray(h_u, dtype=np.float64), np.asarray(h_v, dtype=np.float64)])
    return float(np.tanh((np.dot(a, z) + b) / tau))


def gelu(x):
    """Exact GELU ``x * Phi(x)`` with the standard normal CDF."""
    x = np.asarray(x, dtype=np.float64)
    return x * ndtr(x)


def mlp_residual(h, w1, b1, w2, b2):
    """``h + gelu(h W1 + b1) W2 + b2`` (row-vector convention)."""
    h = np.asarray(h, dtype=np.float64)
    return h + gelu(h @ w1 + b1) @ w2 + b2


@dataclass(frozen=True)
class MessagePlan:
    """Directed message list with per-message normalization and gate endpoints.

    Message ``m`` carries ``coef[m] * alpha(left[m], right[m]) * h[send[m]]``
    into ``recv[m]``. Feature edges always gate as (graph node, feature node),
    in both directions; graph edges gate as (receiver, sender).
    """

    recv: np.ndarray
    send: np.ndarray
    left: np.ndarray
    right: np.ndarray
    coef: np.ndarray
    num_nodes: int
    feature_message: np.ndarray


def message_plan(tg, w0: float, w_x: float) -> MessagePlan:
    tg = check_transformed(tg)
    n = tg.num_nodes
    d = weighted_degrees(tg, w0, w_x)
    e = tg.base.edges
    is_fe = tg.is_feature_edge()
    u, v = e[:, 0], e[:, 1]
    w = np.where(is_fe, float(w_x), 1.0)
    nodes = np.arange(n, dtype=np.int64)
    norm = w / np.sqrt(d[u] * d[v])
    # rows: self loops, then u <- v, then v <- u
    recv = np.concatenate([nodes, u, v])
    send = np.concatenate([nodes, v, u])
    left = np.concatenate([nodes, u, np.where(is_fe, u, v)])
    right = np.concatenate([nodes, v, np.where(is_fe, v, u)])
    coef = np.concatenate([float(w0) / d, norm, norm])
    fmsg = np.concatenate([np.zeros(n, dtype=bool), is_fe, is_fe])
    return MessagePlan(recv, send, left, right, coef, n, fmsg)


def aggregate_layer(plan: MessagePlan, H, gate_a, gate_b, tau: float) -> ad.Tensor:
    """One gated aggregation step over all nodes (differentiable)."""
    H = ad.as_tensor(H)
    gate_a = ad.as_tensor(gate_a)
    m = H.shape[1]
    score_left = ad.matmul(H, _slice(gate_a, 0, m))
    score_right = ad.matmul(H, _slice(gate_a, m, 2 * m))
    s = ad.add(ad.add(ad.take_rows(score_left, plan.left), ad.take_rows(score_right, plan.right)), gate_b)
    alpha = ad.tanh(ad.scale(s, 1.0 / tau))
    weight = ad.mul(alpha, plan.coef)
    return ad.weighted_gather_scatter(weight, H, plan.recv, plan.send, plan.num_nodes)


def _slice(t: ad.Tensor, lo: int, hi: int) -> ad.Tensor:
    shape = t.shape

    def back(g):
        full = np.zeros(shape)
        full[lo:hi] = g
        t._accum(full)

    return ad.Tensor(t.data[lo:hi], _parents=(t,), _backward=back)


def prepare_features(tg, feature_mode: str) -> np.ndarray:
    """Dense input matrix for the model, applying the graph-node feature mode.

    Feature-node rows are always used as computed by the transform.
    """
    tg = check_transformed(tg)
    X = np.asarray(tg.x_star.todense(), dtype=np.float64)
    n = tg.num_graph_nodes
    if feature_mode == "zeros":
        X[:n] = 0.0
    elif feature_mode == "normalized":
        s = X[:n].sum(axis=1, keepdims=True)
        X[:n] = np.divide(X[:n], s, out=np.zeros_like(X[:n]), where=s > 0)
    elif feature_mode != "original":
        raise ValueError(f"unknown feature_mode {feature_mode!r}")
    return X


def forward(
    tg,
    params: ModelParams,
    config: GnnConfig,
    *,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
    param_tensors: Optional[dict] = None,
    plan: Optional[MessagePlan] = None,
    inputs: Optional[np.ndarray] = None,
) -> ad.Tensor:
    """Class logits for the graph nodes of ``tg``.

    Pipeline: input projection, then ``num_layers`` x (gated aggregation,
    residual MLP, dropout when ``training``), then the output head.
    ``param_tensors`` lets the trainer pass leaf tensors that collect
    gradients; by default parameters enter as constants.
    """
    tg = check_transformed(tg)
    num_classes = params.num_classes
    if tg.base.num_features != params.num_features:
        raise ValueError(
            f"graph has {tg.base.num_features} features, model expects {params.num_features}"
        )
    params.check_shapes(params.num_features, num_classes, config)
    if training and config.dropout > 0 and rng is None:
        raise ValueError("training with dropout needs an rng")
    P = param_tensors or {k: ad.Tensor(v) for k, v in params.arrays.items()}
    plan = plan or message_plan(tg, config.w0, config.w_x)
    X = inputs if inputs is not None else prepare_features(tg, config.feature_mode)

    H = ad.add(ad.matmul(X, P["in_weight"]), P["in_bias"])
    for layer in range(config.num_layers):
        H = aggregate_layer(plan, H, P[f"gate_a.{layer}"], P[f"gate_b.{layer}"], config.tau)
        hidden = ad.gelu(ad.add(ad.matmul(H, P[f"mlp_w1.{layer}"]), P[f"mlp_b1.{layer}"]))
        H = ad.add(H, ad.add(ad.matmul(hidden, P[f"mlp_w2.{layer}"]), P[f"mlp_b2.{layer}"]))
        if training and config.dropout > 0:
            keep = 1.0 - config.dropout
            mask = (rng.random(H.shape) < keep) / keep
            H = ad.mul(H, mask)
    graph_rows = np.arange(tg.num_graph_nodes)
    H = ad.take_rows(H, graph_rows)
    return ad.add(ad.matmul(H, P["head_weight"]), P["head_bias"])


__all__ = [
    "GnnConfig",
    "ModelParams",
    "MessagePlan",
    "aggregate_layer",
    "forward",
    "gate",
    "gelu",
    "message_plan",
    "mlp_residual",
    "prepare_features",
    "weighted_degrees",
]
