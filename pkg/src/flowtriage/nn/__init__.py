from flowtriage.nn.mlp import MLPConfig, MLPModel, cic_architecture, unsw_architecture
from flowtriage.nn.loss import ClassWeights, weighted_bce_loss
from flowtriage.nn.adam import Adam
from flowtriage.nn.training import (
    TrainConfig,
    TrainHistory,
    TrainingDivergedError,
    train_binary_classifier,
)
from flowtriage.nn.ensemble import (
    ConfidenceTier,
    EnsemblePrediction,
    assign_tier,
    ensemble_predict,
)
from flowtriage.nn.evaluation import ClassificationReport, evaluate_classifier, roc_points
from flowtriage.nn.store import load_model, save_model

__all__ = [
    "Adam",
    "ClassWeights",
    "ClassificationReport",
    "ConfidenceTier",
    "EnsemblePrediction",
    "MLPConfig",
    "MLPModel",
    "TrainConfig",
    "TrainHistory",
    "TrainingDivergedError",
    "assign_tier",
    "cic_architecture",
    "ensemble_predict",
    "evaluate_classifier",
    "load_model",
    "roc_points",
    "save_model",
    "train_binary_classifier",
    "unsw_architecture",
    "weighted_bce_loss",
]
