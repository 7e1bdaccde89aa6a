"""Full-batch training, prediction and evaluation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from ..graph import UNLABELED
from ..splits import SplitSpec
from ..validation import check_transformed
from . import autodiff as ad
from .model import GnnConfig, ModelParams, forward, message_plan, prepare_features


class TrainingError(RuntimeError):
    pass


class Adam:
    """Bias-corrected Adam over a dict of numpy arrays (updated in place)."""

    def __init__(self, params: dict, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k, p in params.items():
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            p -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


@dataclass
class TrainReport:
    losses: list = field(default_factory=list)
    eval_steps: list = field(default_factory=list)
    val_metrics: list = field(default_factory=list)
    best_step: int = 0
    best_val: float = float("nan")
    test_metric: float = float("nan")
    seconds: float = 0.0
    params: ModelParams | None = field(default=None, repr=False)

    def to_text(self) -> str:
        f = lambda x: format(float(x), ".17g")  # noqa: E731
        lines = [
            f"best_step = {self.best_step}",
            f"best_val = {f(self.best_val)}",
            f"test_metric = {f(self.test_metric)}",
            f"seconds = {f(self.seconds)}",
            f"final_loss = {f(self.losses[-1]) if self.losses else 'nan'}",
            "losses = " + " ".join(f(x) for x in self.losses),
            "eval_steps = " + " ".join(str(s) for s in self.eval_steps),
            "val_metrics = " + " ".join(f(x) for x in self.val_metrics),
        ]
        return "\n".join(lines) + "\n"


def loss_and_grads(tg, params: ModelParams, config: GnnConfig, train_idx, targets, *, training=False, rng=None, plan=None, inputs=None):
    """Cross-entropy on ``train_idx`` and its gradient w.r.t. every parameter."""
    leaves = {k: ad.Tensor(v, requires_grad=True) for k, v in params.arrays.items()}
    logits = forward(tg, params, config, training=training, rng=rng, param_tensors=leaves, plan=plan, inputs=inputs)
    loss = ad.cross_entropy(ad.take_rows(logits, train_idx), targets)
    loss.backward()
    grads = {k: (t.grad if t.grad is not None else np.zeros_like(t.data)) for k, t in leaves.items()}
    return float(loss.data), grads


def predict_scores(params: ModelParams, tg, config: GnnConfig, *, plan=None, inputs=None) -> np.ndarray:
    return forward(tg, params, config, plan=plan, inputs=inputs).data


def predict(params: ModelParams, tg, config: GnnConfig | None = None) -> np.ndarray:
    """Argmax class for every graph node; ties go to the lowest class id."""
    config = config or GnnConfig()
    return np.argmax(predict_scores(params, tg, config), axis=1)


def evaluate(pred, labels, metric: str = "accuracy") -> float:
    """Accuracy of predicted ids, or ROC-AUC of positive-class scores.

    For ``roc_auc``, ``pred`` may be a score vector or an ``(n, 2)`` logit
    matrix (column 1 is taken as the score). Ties get mid-ranks.
    """
    labels = np.asarray(labels)
    pred = np.asarray(pred)
    if labels.size == 0:
        raise ValueError("empty evaluation set")
    if metric == "accuracy":
        if pred.ndim == 2:
            pred = np.argmax(pred, axis=1)
        return float(np.mean(pred == labels))
    if metric != "roc_auc":
        raise ValueError(f"unknown metric {metric!r}")
    if pred.ndim == 2:
        if pred.shape[1] != 2:
            raise ValueError("roc_auc requires binary labels")
        pred = pred[:, 1]
    classes = np.unique(labels)
    if classes.size > 2 or (classes.size and not set(classes.tolist()) <= {0, 1}):
        raise ValueError("roc_auc requires binary labels")
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc needs both classes in the evaluation set")
    ranks = rankdata(pred)  # average ranks for ties
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def _score(scores, labels, idx, metric) -> float:
    if metric == "roc_auc":
        return evaluate(scores[idx], labels[idx], metric)
    return evaluate(np.argmax(scores[idx], axis=1), labels[idx], metric)


def train(tg, splits: SplitSpec, config: GnnConfig, *, params: ModelParams | None = None) -> TrainReport:
    """Full-batch Adam on train-node cross-entropy with best-validation selection.

    Validation runs before the first update and every ``eval_every`` updates
    (and after the last). Selection keeps the earliest best metric. Dropout
    masks and initialization draw from one generator seeded by ``config.seed``.
    """
    start = time.perf_counter()
    tg = check_transformed(tg)
    n = tg.num_graph_nodes
    labels = np.asarray(tg.base.labels[:n])
    if splits.assignment.shape[0] != n:
        raise ValueError(f"splits cover {splits.assignment.shape[0]} nodes, graph has {n}")
    splits.validate(labels)
    train_idx, val_idx, test_idx = splits.train, splits.val, splits.test
    if train_idx.size == 0:
        raise TrainingError("empty train split")
    num_classes = max(tg.base.num_classes, int(labels.max(initial=UNLABELED)) + 1)
    rng = np.random.default_rng(config.seed)
    if params is None:
        params = ModelParams.init(tg.base.num_features, num_classes, config, rng)
    else:
        params = params.copy()
    params.check_shapes(tg.base.num_features, params.num_classes, config)

    plan = message_plan(tg, config.w0, config.w_x)
    inputs = prepare_features(tg, config.feature_mode)
    targets = labels[train_idx]
    opt = Adam(params.arrays, config.learning_rate)
    report = TrainReport()
    best = params.copy()
    select_idx = val_idx if val_idx.size else train_idx

    def checkpoint(step):
        scores = predict_scores(params, tg, config, plan=plan, inputs=inputs)
        metric = _score(scores, labels, select_idx, config.metric)
        report.eval_steps.append(step)
        report.val_metrics.append(metric)
        if not report.eval_steps[:-1] or metric > report.best_val:
            report.best_val = metric
            report.best_step = step
            return True
        return False

    if checkpoint(0):
        best = params.copy()
    for step in range(1, config.steps + 1):
        loss, grads = loss_and_grads(
            tg, params, config, train_idx, targets, training=True, rng=rng, plan=plan, inputs=inputs
        )
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite loss at step {step}")
        report.losses.append(loss)
        opt.step(params.arrays, grads)
        if step % config.eval_every == 0 or step == config.steps:
            if checkpoint(step):
                best = params.copy()

    report.params = best
    if test_idx.size:
        scores = predict_scores(best, tg, config, plan=plan, inputs=inputs)
        report.test_metric = _score(scores, labels, test_idx, config.metric)
    report.seconds = time.perf_counter() - start
    return report
