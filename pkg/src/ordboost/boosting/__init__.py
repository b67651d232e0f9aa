from .bootstrap import bootstrap_weights
from .features import ApplyTable, CombinationIndex, FeatureStore, build_combinations
from .losses import calc_gradient, loss_value
from .model import TrainedModel, predict
from .naive import PrefixModels, train_ordered_naive
from .params import LOGLOSS, MSE, ORDERED_MODE, PLAIN, BoostParams
from .trainer import IterationRecord, Trainer, build_tree, train

__all__ = [
    "ApplyTable", "BoostParams", "CombinationIndex", "FeatureStore", "IterationRecord", "LOGLOSS", "MSE",
    "ORDERED_MODE", "PLAIN", "PrefixModels", "TrainedModel", "Trainer", "bootstrap_weights",
    "build_combinations", "build_tree", "calc_gradient", "loss_value", "predict", "train",
    "train_ordered_naive",
]
