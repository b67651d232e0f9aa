from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit

EPS = 1e-15


@dataclass(frozen=True)
class MetricReport:
    logloss: float
    zero_one: float
    n_eval: int

    def to_dict(self) -> dict:
        return asdict(self)


def eval_metrics(scores, labels) -> MetricReport:
    """Logloss and zero-one loss of raw scores against binary labels.

    Probabilities are clipped to ``[1e-15, 1 - 1e-15]``; a probability of
    exactly 0.5 predicts class 0.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if len(scores) == 0:
        raise ValueError("no predictions to evaluate")
    if len(scores) != len(labels):
        raise ValueError("scores and labels differ in length")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be 0 or 1")
    q = np.clip(expit(scores), EPS, 1 - EPS)
    logloss = float(-np.mean(labels * np.log(q) + (1 - labels) * np.log(1 - q)))
    zero_one = float(np.mean((q > 0.5) != (labels == 1)))
    return MetricReport(logloss, zero_one, len(scores))
