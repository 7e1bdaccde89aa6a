"""scikit-learn style classifier around the self-gated GNN."""

from __future__ import annotations

from dataclasses import fields, replace

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ..graph import UNLABELED, _frozen
from ..splits import SplitSpec, random_split
from ..validation import check_node_labels, check_transformed
from .model import GnnConfig, forward
from .train import train


class SelfGatedGNNClassifier(ClassifierMixin, BaseEstimator):
    """Transductive node classifier.

    ``X`` is a :class:`~graphite.Graph` or a transformed graph; plain graphs
    are used as-is (no feature nodes). Wrap with a
    :class:`~graphite.GraphiteTransformer` in a pipeline to transform first.

    Parameters mirror :class:`~graphite.gnn.model.GnnConfig`.
    """

    def __init__(
        self,
        num_layers=2,
        hidden_dim=32,
        w0=1.0,
        w_x=0.6,
        tau=1.0,
        dropout=0.2,
        learning_rate=0.01,
        steps=200,
        seed=0,
        feature_mode="original",
        metric="accuracy",
        eval_every=10,
    ):
        self.num_layers = num_layers
        self.hidden_dim = hidden_dim
        self.w0 = w0
        self.w_x = w_x
        self.tau = tau
        self.dropout = dropout
        self.learning_rate = learning_rate
        self.steps = steps
        self.seed = seed
        self.feature_mode = feature_mode
        self.metric = metric
        self.eval_every = eval_every

    def _config(self) -> GnnConfig:
        return GnnConfig(**{f.name: getattr(self, f.name) for f in fields(GnnConfig)})

    def fit(self, X, y=None, splits: SplitSpec | None = None):
        """Train on ``X``.

        Parameters
        ----------
        X : Graph or TransformedGraph
        y : array of shape (num_graph_nodes,), optional
            Labels (``-1`` = unlabeled). Defaults to the graph's labels.
        splits : SplitSpec, optional
            Train/val/test assignment. Defaults to a seeded 48/32/20 split
            of the labeled nodes.
        """
        tg = check_transformed(X)
        n = tg.num_graph_nodes
        if y is not None:
            y = check_node_labels(y, n)
            tg = _with_labels(tg, y)
        labels = tg.base.labels[:n]
        if splits is None:
            splits = random_split(labels, seed=self.seed)
        config = self._config()
        self.train_report_ = train(tg, splits, config)
        self.params_ = self.train_report_.params
        self.config_ = config
        self.classes_ = np.arange(self.params_.num_classes)
        self.n_features_in_ = tg.base.num_features
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("SelfGatedGNNClassifier is not fitted yet")

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        return forward(check_transformed(X), self.params_, self.config_).data

    def predict_proba(self, X) -> np.ndarray:
        z = self.decision_function(X)
        z = np.exp(z - z.max(axis=1, keepdims=True))
        return z / z.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)


def _with_labels(tg, y):
    labels = np.concatenate([y, np.full(tg.num_nodes - y.size, UNLABELED, dtype=np.int64)])
    num_classes = max(tg.base.num_classes, int(y.max(initial=-1)) + 1)
    base = replace(tg.base, labels=_frozen(labels), num_classes=num_classes)
    return replace(tg, base=base)
