"""Gradient boosting over oblivious trees with ordered target statistics and
ordered boosting, plus a lab for measuring prediction shift."""

from .boosting import BoostParams, TrainedModel, Trainer, predict, train
from .dataset import Dataset, FeatureSchema, load_csv, split

__version__ = "0.1.0"

__all__ = ["BoostParams", "Dataset", "FeatureSchema", "TrainedModel", "Trainer", "load_csv", "predict",
           "split", "train"]
