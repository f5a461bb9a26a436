"""Probabilistic super-resolution network, NLL loss, training and checkpoints"""

from .network import (
    VARIANCE_FLOOR,
    NetworkDescriptor,
    NetworkParams,
    PredictiveOutput,
    forward,
    forward_batch,
    init_params,
    predict_in_chunks,
)
from .loss import evaluate_nll, fit_variance_map, nll_loss, optimal_sigma
from .checkpoint import load_checkpoint, save_checkpoint
from .trainer import TrainConfig, Trainer, TrainingHistory, finetune, train

__all__ = [
    "VARIANCE_FLOOR",
    "NetworkDescriptor",
    "NetworkParams",
    "PredictiveOutput",
    "forward",
    "forward_batch",
    "init_params",
    "predict_in_chunks",
    "evaluate_nll",
    "fit_variance_map",
    "nll_loss",
    "optimal_sigma",
    "load_checkpoint",
    "save_checkpoint",
    "TrainConfig",
    "Trainer",
    "TrainingHistory",
    "finetune",
    "train",
]
