"""Self-gated GNN over transformed graphs, with its own reverse-mode core."""

from .estimator import SelfGatedGNNClassifier
from .model import (
    GnnConfig,
    ModelParams,
    aggregate_layer,
    forward,
    gate,
    gelu,
    message_plan,
    mlp_residual,
    weighted_degrees,
)
from .train import Adam, TrainingError, TrainReport, evaluate, predict, train

__all__ = [
    "Adam",
    "GnnConfig",
    "ModelParams",
    "SelfGatedGNNClassifier",
    "TrainReport",
    "TrainingError",
    "aggregate_layer",
    "evaluate",
    "forward",
    "gate",
    "gelu",
    "message_plan",
    "mlp_residual",
    "predict",
    "train",
    "weighted_degrees",
]
